#include "lpcoreset/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lpcs {

namespace {

constexpr char kMagic[4] = {'L', 'P', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void append_raw(std::vector<unsigned char>& buf, const T& value) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(&value);
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T read_raw(const unsigned char*& cursor, const unsigned char* end) {
  if (cursor + sizeof(T) > end)
    throw std::invalid_argument("lpcm: truncated file");
  T value;
  std::memcpy(&value, cursor, sizeof(T));
  cursor += sizeof(T);
  return value;
}

}  // namespace

std::vector<unsigned char> lpcm_bytes(const Mat& m) {
  static_assert(sizeof(double) == 8);
  std::vector<unsigned char> buf;
  buf.reserve(16 + sizeof(double) * m.size());
  buf.insert(buf.end(), kMagic, kMagic + 4);
  append_raw(buf, kVersion);
  append_raw(buf, static_cast<std::uint64_t>(m.rows()));
  append_raw(buf, static_cast<std::uint64_t>(m.cols()));
  // Row-major storage writes out directly.
  const auto* data = reinterpret_cast<const unsigned char*>(m.data());
  buf.insert(buf.end(), data, data + sizeof(double) * m.size());
  return buf;
}

void write_lpcm(const std::string& path, const Mat& m) {
  const std::vector<unsigned char> buf = lpcm_bytes(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("write_lpcm: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write_lpcm: write failed");
}

Mat read_lpcm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("read_lpcm: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  const unsigned char* cursor = buf.data();
  const unsigned char* end = buf.data() + buf.size();
  if (buf.size() < 4 || std::memcmp(cursor, kMagic, 4) != 0)
    throw std::invalid_argument("read_lpcm: bad magic");
  cursor += 4;
  if (read_raw<std::uint32_t>(cursor, end) != kVersion)
    throw std::invalid_argument("read_lpcm: unsupported version");
  const auto n = read_raw<std::uint64_t>(cursor, end);
  const auto d = read_raw<std::uint64_t>(cursor, end);
  if (n == 0 || d == 0 || (end - cursor) != static_cast<std::ptrdiff_t>(
                              n * d * sizeof(double)))
    throw std::invalid_argument("read_lpcm: size mismatch");
  Mat m(static_cast<Index>(n), static_cast<Index>(d));
  std::memcpy(m.data(), cursor, n * d * sizeof(double));
  return m;
}

void write_csv(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_csv: cannot open " + path);
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf;
      if (j + 1 < m.cols()) out << ',';
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed");
}

Mat read_csv(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* cursor = line.data();
    const char* end = line.data() + line.size();
    while (cursor < end) {
      while (cursor < end && (*cursor == ' ' || *cursor == '\t')) ++cursor;
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cursor, end, value);
      if (ec != std::errc())
        throw std::invalid_argument("read_csv: bad number in " + path);
      row.push_back(value);
      cursor = ptr;
      while (cursor < end && (*cursor == ' ' || *cursor == '\t' ||
                              *cursor == '\r'))
        ++cursor;
      if (cursor < end) {
        if (*cursor != ',')
          throw std::invalid_argument("read_csv: expected comma");
        ++cursor;
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_csv: empty file");
  const std::size_t d = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != d)
      throw std::invalid_argument("read_csv: ragged rows");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

Mat read_matrix(const std::string& path, bool skip_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("read_matrix: cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kMagic, 4) == 0) return read_lpcm(path);
  return read_csv(path, skip_header);
}

std::string sha256_hex(const void* data, std::size_t len) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * digest_len);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string dataset_hash(const Mat& m) {
  const std::vector<unsigned char> buf = lpcm_bytes(m);
  return sha256_hex(buf.data(), buf.size());
}

std::string coreset_to_json(const WeightedCoreset& c) {
  nlohmann::ordered_json j;
  j["format"] = "lpcoreset/1";
  j["dataset_sha256"] = c.meta.dataset_hash;
  j["p"] = c.meta.cfg.p;
  j["k"] = c.meta.cfg.k;
  j["eps"] = c.meta.cfg.eps;
  j["delta"] = c.meta.cfg.delta;
  j["seed"] = c.meta.cfg.seed;
  j["indices"] = c.indices;
  j["scales"] = c.scales;
  j["meta"] = {{"rounds", c.meta.rounds},
               {"per_round_sizes", c.meta.per_round_sizes},
               {"lambda_per_round", c.meta.lambda_per_round},
               {"mode", c.meta.mode}};
  return j.dump(2) + "\n";
}

WeightedCoreset coreset_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("format").get<std::string>() != "lpcoreset/1")
    throw std::invalid_argument("coreset_from_json: unknown format");
  WeightedCoreset c;
  c.meta.dataset_hash = j.at("dataset_sha256").get<std::string>();
  c.meta.cfg.p = j.at("p").get<double>();
  c.meta.cfg.k = j.at("k").get<Index>();
  c.meta.cfg.eps = j.at("eps").get<double>();
  c.meta.cfg.delta = j.at("delta").get<double>();
  c.meta.cfg.seed = j.at("seed").get<std::uint64_t>();
  c.indices = j.at("indices").get<std::vector<std::int64_t>>();
  c.scales = j.at("scales").get<std::vector<double>>();
  const auto& meta = j.at("meta");
  c.meta.rounds = meta.at("rounds").get<int>();
  c.meta.per_round_sizes = meta.at("per_round_sizes").get<std::vector<Index>>();
  c.meta.lambda_per_round =
      meta.at("lambda_per_round").get<std::vector<double>>();
  c.meta.mode = meta.at("mode").get<std::string>();
  if (c.indices.size() != c.scales.size())
    throw std::invalid_argument("coreset_from_json: index/scale mismatch");
  return c;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("read_text_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("write_text_file: cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("write_text_file: write failed");
}

}  // namespace lpcs
