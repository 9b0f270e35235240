#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include "vsa/error.hpp"

namespace vsa_cli {

void Manifest::set(const std::string& key, double value) {
  // Round-trip precision so a rerun sees the same doubles.
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  entries_[key] = buf;
}

void Manifest::digest(const std::string& prefix, const std::filesystem::path& file) {
  entries_[prefix + "." + file.filename().string()] = "sha256:" + sha256_hex(file);
}

void Manifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw vsa::FormatError(vsa::FormatError::Code::kIo, "cannot write " + path.string());
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

std::string sha256_hex(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw vsa::FormatError(vsa::FormatError::Code::kIo, "cannot read " + file.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

}  // namespace vsa_cli
