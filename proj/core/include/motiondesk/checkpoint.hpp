#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "motiondesk/parameter.hpp"

namespace md {

// Checkpoint layout:
//   MDCKPT 1 <n_params>\n
//   then per parameter: <name>\n<space-separated shape>\n<raw little-endian f64 values>
// Adam moments are not persisted.

struct NamedTensor {
  std::string name;
  Tensor value;
};

void write_checkpoint(std::ostream& out, std::span<const Parameter* const> params);
void save_checkpoint(const std::filesystem::path& path, std::span<const Parameter* const> params);

std::vector<NamedTensor> read_checkpoint(std::istream& in);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

// Copies checkpoint values into params by name. Every param must be present
// with a matching shape.
void restore_parameters(const std::vector<NamedTensor>& saved, std::span<Parameter* const> params);

// Little-endian f64 helpers shared with the embedding cache format.
void write_f64_le(std::ostream& out, std::span<const double> values);
void read_f64_le(std::istream& in, std::span<double> values);

}  // namespace md
