#include "output.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include <boost/version.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#ifndef SYMCO_VERSION
#define SYMCO_VERSION "unknown"
#endif

namespace symco::cli {

using nlohmann::json;

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (r.ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf.data(), r.ptr);
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

json version_info() {
  return {{"symco", SYMCO_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"openssl", OPENSSL_VERSION_TEXT},
          {"compiler", __VERSION__}};
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void write_outputs(const std::filesystem::path& dir, const FileSet& files, const json& config) {
  std::filesystem::create_directories(dir);
  json listing = json::array();
  for (const auto& [name, bytes] : files) {
    write_file(dir / name, bytes);
    listing.push_back({{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  const json manifest = {{"config", config},
                         {"seed", config.at("seed")},
                         {"versions", version_info()},
                         {"files", listing}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace symco::cli
