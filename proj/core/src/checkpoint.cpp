#include "dagn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "dagn/error.hpp"

namespace dagn {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'G', 'N', 'C', 'K', 'P', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

double read_f64(std::istream& in) {
  std::uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const std::vector<Parameter*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write checkpoint " + path.string());
  out.write(kMagic, 8);
  write_u64(out, header.seed);
  write_u64(out, header.config_hash);
  write_u64(out, params.size());
  for (const Parameter* p : params) {
    write_u64(out, p->name.size());
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u64(out, p->value.rank());
    for (std::size_t d : p->value.shape()) write_u64(out, d);
    for (std::size_t i = 0; i < p->value.numel(); ++i) write_f64(out, p->value.at(i));
  }
  if (!out) raise(ErrorKind::Io, "short write to checkpoint " + path.string());
}

namespace {

struct ParsedCheckpoint {
  CheckpointHeader header;
  std::map<std::string, Tensor> tensors;
};

ParsedCheckpoint parse(const std::filesystem::path& path, bool header_only) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    raise(ErrorKind::Ingestion, path.string() + ": not a checkpoint file");
  }
  ParsedCheckpoint result;
  result.header.seed = read_u64(in);
  result.header.config_hash = read_u64(in);
  if (header_only) return result;
  std::uint64_t count = read_u64(in);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::uint64_t name_len = read_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    std::uint64_t rank = read_u64(in);
    Shape shape(rank);
    std::size_t numel = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      shape[d] = read_u64(in);
      numel *= shape[d];
    }
    std::vector<double> data(numel);
    for (std::size_t i = 0; i < numel; ++i) data[i] = read_f64(in);
    if (!in) raise(ErrorKind::Ingestion, path.string() + ": truncated record '" + name + "'");
    if (!result.tensors.emplace(name, Tensor::from(std::move(shape), std::move(data))).second) {
      raise(ErrorKind::Ingestion, path.string() + ": duplicate parameter '" + name + "'");
    }
  }
  return result;
}

}  // namespace

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  return parse(path, true).header;
}

CheckpointHeader load_checkpoint(const std::filesystem::path& path,
                                 const std::vector<Parameter*>& params) {
  ParsedCheckpoint parsed = parse(path, false);
  if (parsed.tensors.size() != params.size()) {
    raise(ErrorKind::Ingestion, path.string() + ": has " + std::to_string(parsed.tensors.size()) +
                                    " parameters, model expects " + std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    auto it = parsed.tensors.find(p->name);
    if (it == parsed.tensors.end()) {
      raise(ErrorKind::Ingestion, path.string() + ": missing parameter '" + p->name + "'");
    }
    if (it->second.shape() != p->value.shape()) {
      raise(ErrorKind::Ingestion, path.string() + ": parameter '" + p->name + "' has shape " +
                                      shape_to_string(it->second.shape()) + ", model expects " +
                                      shape_to_string(p->value.shape()));
    }
    p->value = it->second;
    p->zero_grad();
  }
  return parsed.header;
}

}  // namespace dagn
