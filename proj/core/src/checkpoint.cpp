#include "motiondesk/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "motiondesk/error.hpp"

namespace md {

void write_f64_le(std::ostream& out, std::span<const double> values) {
  std::vector<char> buffer(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (std::size_t b = 0; b < 8; ++b) buffer[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

void read_f64_le(std::istream& in, std::span<double> values) {
  std::vector<unsigned char> buffer(values.size() * 8);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::size_t>(in.gcount()) != buffer.size()) throw IoError("truncated f64 payload");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buffer[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
}

void write_checkpoint(std::ostream& out, std::span<const Parameter* const> params) {
  out << "MDCKPT 1 " << params.size() << '\n';
  for (const Parameter* p : params) {
    out << p->name << '\n';
    const Shape& shape = p->value.shape();
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? " " : "") << shape[i];
    out << '\n';
    write_f64_le(out, p->value.data());
  }
}

void save_checkpoint(const std::filesystem::path& path, std::span<const Parameter* const> params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, params);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

std::vector<NamedTensor> read_checkpoint(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("checkpoint: missing header");
  std::istringstream head(header);
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(head >> magic >> version >> count) || magic != "MDCKPT" || version != 1) {
    throw IoError("checkpoint: bad header '" + header + "'");
  }
  std::vector<NamedTensor> result;
  result.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    NamedTensor entry;
    std::string shape_line;
    if (!std::getline(in, entry.name) || !std::getline(in, shape_line)) {
      throw IoError("checkpoint: truncated at parameter " + std::to_string(i));
    }
    Shape shape;
    std::istringstream dims(shape_line);
    std::size_t extent = 0;
    while (dims >> extent) shape.push_back(extent);
    if (shape.empty()) throw IoError("checkpoint: empty shape for '" + entry.name + "'");
    entry.value = Tensor(shape);
    read_f64_le(in, entry.value.data());
    result.push_back(std::move(entry));
  }
  return result;
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  return read_checkpoint(in);
}

void restore_parameters(const std::vector<NamedTensor>& saved, std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    const NamedTensor* match = nullptr;
    for (const NamedTensor& entry : saved) {
      if (entry.name == p->name) {
        match = &entry;
        break;
      }
    }
    if (match == nullptr) throw IoError("checkpoint: missing parameter '" + p->name + "'");
    if (match->value.shape() != p->value.shape()) {
      throw IoError("checkpoint: parameter '" + p->name + "' has shape " + shape_string(match->value.shape()) +
                    ", expected " + shape_string(p->value.shape()));
    }
    p->value = match->value;
    p->adam_m = Tensor(p->value.shape(), 0.0);
    p->adam_v = Tensor(p->value.shape(), 0.0);
    p->step_count = 0;
  }
}

}  // namespace md
