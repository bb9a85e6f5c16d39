#pragma once

#include <string>
#include <vector>

#include "lpcoreset/sampling.hpp"

namespace lpcs {

/// Canonical binary encoding: magic "LPCM", u32 version = 1, u64 n, u64 d,
/// then n*d IEEE-754 binary64 values, row-major, little-endian.
std::vector<unsigned char> lpcm_bytes(const Mat& m);
void write_lpcm(const std::string& path, const Mat& m);
Mat read_lpcm(const std::string& path);

/// CSV with '.' decimals and no header by default; values are written with
/// 17 significant digits so a round trip reproduces every double exactly.
void write_csv(const std::string& path, const Mat& m);
Mat read_csv(const std::string& path, bool skip_header = false);

/// Reads either format, sniffing the LPCM magic.
Mat read_matrix(const std::string& path, bool skip_header = false);

std::string sha256_hex(const void* data, std::size_t len);

/// SHA-256 of the canonical LPCM encoding, so the hash is independent of
/// which on-disk format the matrix came from.
std::string dataset_hash(const Mat& m);

std::string coreset_to_json(const WeightedCoreset& c);
WeightedCoreset coreset_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace lpcs
