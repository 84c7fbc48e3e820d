#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hclab/environment.hpp"
#include "hclab/potential.hpp"

namespace hclab {

using Json = nlohmann::json;

/// Lower-case hex SHA-1 of the bytes.
std::string sha1_hex(std::string_view bytes);
/// Git blob hash: SHA-1 of "blob <size>\0" followed by the bytes.
std::string git_blob_hash(std::string_view bytes);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

/// SiteSet text format: a JSON header line {"d": .., "count": .., ...} followed by
/// one whitespace-separated integer tuple per line.
void write_site_set(std::ostream& os, const SiteSet& s, const Json& extra = Json::object());
SiteSet read_site_set(std::istream& is, Json* header = nullptr);

/// Binary environment: magic "HCLENV01", u32 version, u32 d, f64 lambda,
/// u32 law kind, f64 a, f64 b, f64 p, u64 seed, i32 offset[d], i32 window lo[d],
/// i32 window hi[d], u64 count, then count little-endian f64 weights in canonical
/// edge order. A JSON sidecar "<path>.json" repeats the header.
std::string encode_environment(const Conductances& env);
Conductances decode_environment(std::string_view bytes);
Json environment_header(const Conductances& env);
void write_environment(const std::filesystem::path& path, const Conductances& env);
Conductances read_environment(const std::filesystem::path& path);

/// Binary field snapshot: magic "HCLFLD01", u32 version, u32 d, u64 count, count
/// i32 tuples (the domain in SiteSet order), then count little-endian f64 values.
std::string encode_field(const Field& f);
Field decode_field(std::string_view bytes);

/// CSV with a header row and a "# config_hash=<hash>" comment line.
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> columns, std::string config_hash);
  CsvWriter& row(const std::vector<std::string>& cells);
  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::string text_;
  std::size_t rows_ = 0;
};

/// Vector dump in the "index value" text format.
void write_vector_dump(std::ostream& os, const Vector& v);

}  // namespace hclab
