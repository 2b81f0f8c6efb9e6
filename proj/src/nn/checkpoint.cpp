#include "auvhunt/nn/checkpoint.hpp"

#include "auvhunt/binary_io.hpp"

namespace auvhunt::nn {

namespace {

void write_tensor_body(io::Writer& w, const Tensor& t) { w.floats(t.data()); }

Tensor read_tensor_body(io::Reader& r, const Shape& shape) {
  Tensor t(shape);
  r.floats(t.data());
  return t;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  io::Writer w;
  w.u32(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.str(ckpt.metadata);
  w.u32(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& e : ckpt.params.entries()) {
    w.str(e.name);
    w.u32(static_cast<std::uint32_t>(e.value.shape().size()));
    for (auto d : e.value.shape()) w.u64(d);
    write_tensor_body(w, e.value);
  }
  if (ckpt.optimizer) {
    const auto& opt = *ckpt.optimizer;
    if (opt.first.size() != ckpt.params.size() || opt.second.size() != ckpt.params.size()) {
      throw ValidationError("checkpoint: optimizer moments do not match parameters");
    }
    w.u32(1);
    w.u64(opt.step);
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      const auto& shape = ckpt.params[i].value.shape();
      if (opt.first[i].shape() != shape || opt.second[i].shape() != shape) {
        throw ShapeError("checkpoint moments", opt.first[i].shape(), shape);
      }
      write_tensor_body(w, opt.first[i]);
      write_tensor_body(w, opt.second[i]);
    }
  } else {
    w.u32(0);
  }
  const auto crc = io::crc32(w.bytes());
  w.u32(crc);
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw TruncatedError("checkpoint: file too short");
  io::Reader head(bytes, "checkpoint");
  if (head.u32() != kCheckpointMagic) throw FormatError("checkpoint: bad magic number");
  const auto version = head.u32();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto body = bytes.first(bytes.size() - 4);
  io::Reader tail(bytes.last(4), "checkpoint");
  if (io::crc32(body) != tail.u32()) throw ChecksumError("checkpoint", "CRC-32 mismatch");

  io::Reader r(body, "checkpoint");
  r.u32();
  r.u32();
  Checkpoint ckpt;
  ckpt.metadata = r.str();
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.str();
    const auto ndim = r.u32();
    if (ndim > 8) throw FormatError("checkpoint: parameter '" + name + "' has too many dims");
    Shape shape(ndim);
    for (auto& d : shape) d = r.u64();
    if (Tensor::count(shape) * sizeof(float) > r.remaining()) {
      throw TruncatedError("checkpoint: parameter '" + name + "' is truncated");
    }
    ckpt.params.add(std::move(name), read_tensor_body(r, shape));
  }
  const auto has_opt = r.u32();
  if (has_opt > 1) throw FormatError("checkpoint: bad optimizer flag");
  if (has_opt) {
    OptimizerSnapshot opt;
    opt.step = r.u64();
    for (const auto& e : ckpt.params.entries()) {
      opt.first.push_back(read_tensor_body(r, e.value.shape()));
      opt.second.push_back(read_tensor_body(r, e.value.shape()));
    }
    ckpt.optimizer = std::move(opt);
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes after payload");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace auvhunt::nn
