#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace md {

// Header line "MDEMB 1 <count> <dim>" followed by count records of dim
// little-endian f64 values, in clip manifest order.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<std::vector<double>> rows;
};

void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable read_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

}  // namespace md
