#include "hclab/io.hpp"

#include <openssl/sha.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hclab/error.hpp"

namespace hclab {

namespace {

constexpr char kEnvMagic[8] = {'H', 'C', 'L', 'E', 'N', 'V', '0', '1'};
constexpr char kFieldMagic[8] = {'H', 'C', 'L', 'F', 'L', 'D', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  template <class T>
  void put(T v) {
    v = to_little(v);
    out_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > in_.size()) throw InvalidArgument("binary file truncated");
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }
  void expect_magic(const char (&magic)[8]) {
    if (in_.size() < 8 || std::memcmp(in_.data(), magic, 8) != 0) throw InvalidArgument("bad file magic");
    pos_ = 8;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string hex(const unsigned char* d, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(digits[d[i] >> 4]);
    s.push_back(digits[d[i] & 15]);
  }
  return s;
}

Site read_site(Reader& r, int d) {
  Site x(d);
  for (int i = 0; i < d; ++i) x[i] = r.get<std::int32_t>();
  return x;
}

void put_site(Writer& w, const Site& x) {
  for (int i = 0; i < x.dim(); ++i) w.put<std::int32_t>(x[i]);
}

Json site_json(const Site& x) { return Json(std::vector<int>(x.coords().begin(), x.coords().end())); }

}  // namespace

std::string sha1_hex(std::string_view bytes) {
  unsigned char d[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), d);
  return hex(d, SHA_DIGEST_LENGTH);
}

std::string git_blob_hash(std::string_view bytes) {
  std::string s = "blob " + std::to_string(bytes.size());
  s.push_back('\0');
  s.append(bytes);
  return sha1_hex(s);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_site_set(std::ostream& os, const SiteSet& s, const Json& extra) {
  Json header = extra;
  header["d"] = s.empty() ? 0 : s.dim();
  header["count"] = s.size();
  os << header.dump() << '\n';
  for (const Site& x : s) {
    for (int i = 0; i < x.dim(); ++i) os << (i ? " " : "") << x[i];
    os << '\n';
  }
}

SiteSet read_site_set(std::istream& is, Json* header) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("missing site-set header");
  Json h;
  try {
    h = Json::parse(line);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("bad site-set header: ") + e.what());
  }
  if (!h.contains("d") || !h.contains("count")) throw InvalidArgument("site-set header needs d and count");
  const int d = h["d"].get<int>();
  const auto count = h["count"].get<std::size_t>();
  std::vector<Site> sites;
  sites.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(is, line)) throw InvalidArgument("site-set file truncated");
    std::istringstream ls(line);
    Site x(d);
    for (int i = 0; i < d; ++i)
      if (!(ls >> x[i])) throw InvalidArgument("malformed site tuple: " + line);
    sites.push_back(x);
  }
  if (header) *header = h;
  return count ? SiteSet(std::move(sites)) : SiteSet();
}

std::string encode_environment(const Conductances& env) {
  const int d = env.dim();
  Writer w;
  w.raw(kEnvMagic, 8);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  w.put<double>(env.lambda());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(env.law().kind));
  w.put<double>(env.law().a);
  w.put<double>(env.law().b);
  w.put<double>(env.law().p);
  w.put<std::uint64_t>(env.seed());
  put_site(w, env.offset().dim() == d ? env.offset() : Site(d));
  put_site(w, env.window().lo());
  put_site(w, env.window().hi());
  w.put<std::uint64_t>(env.edge_count());
  env.for_each_edge([&](const Site&, int, double v) { w.put<double>(v); });
  return w.take();
}

Conductances decode_environment(std::string_view bytes) {
  Reader r(bytes);
  r.expect_magic(kEnvMagic);
  if (r.get<std::uint32_t>() != kVersion) throw InvalidArgument("unsupported environment file version");
  const auto d = static_cast<int>(r.get<std::uint32_t>());
  validate_dimension(d);
  const double lambda = r.get<double>();
  EnvironmentLaw law;
  const auto kind = r.get<std::uint32_t>();
  if (kind > static_cast<std::uint32_t>(EnvironmentLaw::Kind::explicit_weights))
    throw InvalidArgument("unknown environment law");
  law.kind = static_cast<EnvironmentLaw::Kind>(kind);
  law.a = r.get<double>();
  law.b = r.get<double>();
  law.p = r.get<double>();
  const auto seed = r.get<std::uint64_t>();
  const Site offset = read_site(r, d);
  const Site lo = read_site(r, d);
  const Site hi = read_site(r, d);
  const auto count = r.get<std::uint64_t>();
  std::vector<double> weights(count);
  for (auto& v : weights) v = r.get<double>();
  if (!r.done()) throw InvalidArgument("trailing bytes in environment file");
  return Conductances::from_canonical(law, lambda, Box(lo, hi), seed, offset, weights);
}

Json environment_header(const Conductances& env) {
  Json j;
  j["format"] = "HCLENV01";
  j["version"] = kVersion;
  j["d"] = env.dim();
  j["lambda"] = env.lambda();
  j["law"] = {{"kind", static_cast<std::uint32_t>(env.law().kind)},
              {"description", env.law().describe()},
              {"a", env.law().a},
              {"b", env.law().b},
              {"p", env.law().p}};
  j["seed"] = env.seed();
  j["offset"] = site_json(env.offset().dim() == env.dim() ? env.offset() : Site(env.dim()));
  j["window"] = {{"lo", site_json(env.window().lo())}, {"hi", site_json(env.window().hi())}};
  j["edge_count"] = env.edge_count();
  return j;
}

void write_environment(const std::filesystem::path& path, const Conductances& env) {
  write_file(path, encode_environment(env));
  write_file(path.string() + ".json", environment_header(env).dump(2) + "\n");
}

Conductances read_environment(const std::filesystem::path& path) { return decode_environment(read_file(path)); }

std::string encode_field(const Field& f) {
  Writer w;
  w.raw(kFieldMagic, 8);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(f.domain.empty() ? 0u : static_cast<std::uint32_t>(f.domain.dim()));
  w.put<std::uint64_t>(f.domain.size());
  for (const Site& x : f.domain) put_site(w, x);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) w.put<double>(f.values(i));
  return w.take();
}

Field decode_field(std::string_view bytes) {
  Reader r(bytes);
  r.expect_magic(kFieldMagic);
  if (r.get<std::uint32_t>() != kVersion) throw InvalidArgument("unsupported field file version");
  const auto d = static_cast<int>(r.get<std::uint32_t>());
  const auto count = r.get<std::uint64_t>();
  std::vector<Site> sites;
  sites.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) sites.push_back(read_site(r, d));
  Vector v(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.get<double>();
  if (!r.done()) throw InvalidArgument("trailing bytes in field file");
  return Field(count ? SiteSet(std::move(sites)) : SiteSet(), std::move(v));
}

CsvWriter::CsvWriter(std::vector<std::string> columns, std::string config_hash) : columns_(columns.size()) {
  text_ = "# config_hash=" + config_hash + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) text_ += (i ? "," : "") + columns[i];
  text_ += "\n";
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidArgument("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += "\n";
  ++rows_;
  return *this;
}

std::string CsvWriter::str() const { return text_; }

void write_vector_dump(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << i << ' ' << format_double(v(i)) << '\n';
}

}  // namespace hclab
