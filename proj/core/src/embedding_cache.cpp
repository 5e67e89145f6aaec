#include "motiondesk/embedding_cache.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "motiondesk/checkpoint.hpp"
#include "motiondesk/error.hpp"

namespace md {

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << "MDEMB 1 " << table.rows.size() << ' ' << table.dim << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.dim) throw ShapeError("embedding cache: row width differs from dim");
    write_f64_le(out, row);
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write embedding cache " + path.string());
  write_embeddings(out, table);
  if (!out) throw IoError("failed writing embedding cache " + path.string());
}

EmbeddingTable read_embeddings(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("embedding cache: missing header");
  std::istringstream head(header);
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  EmbeddingTable table;
  if (!(head >> magic >> version >> count >> table.dim) || magic != "MDEMB" || version != 1) {
    throw IoError("embedding cache: bad header '" + header + "'");
  }
  table.rows.assign(count, std::vector<double>(table.dim));
  for (auto& row : table.rows) read_f64_le(in, row);
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read embedding cache " + path.string());
  return read_embeddings(in);
}

}  // namespace md
