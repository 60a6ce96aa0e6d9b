#include "structeval/cache.hpp"

#include <cerrno>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>
#include <unistd.h>

#include "structeval/errors.hpp"
#include "structeval/rng.hpp"
#include "structeval/text.hpp"

namespace structeval {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorKind::Io, "cannot create cache directory " + dir_.string() +
                                   ": " + ec.message());
  }
}

std::filesystem::path ResponseCache::file_for(const std::string& key) const {
  return dir_ / (key + ".txt");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::ifstream in(file_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string ResponseCache::put_if_absent(const std::string& key,
                                         const std::string& value) {
  const std::filesystem::path final_path = file_for(key);

  // Unique temp name per attempt; link() refuses to clobber, which gives the
  // write-once guarantee under concurrent writers.
  static std::atomic<uint64_t> counter{0};
  std::filesystem::path tmp =
      dir_ / (key + ".tmp." + std::to_string(::getpid()) + "." +
              std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << value;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  int rc = ::link(tmp.c_str(), final_path.c_str());
  int saved_errno = errno;
  ::unlink(tmp.c_str());
  if (rc == 0) return value;
  if (saved_errno == EEXIST) {
    if (auto existing = get(key)) return *existing;
  }
  throw Error(ErrorKind::Io,
              "cannot commit cache entry " + final_path.string());
}

std::string ResponseCache::sha256_hex(std::string_view payload) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(payload.data(), payload.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string CachedModel::complete(const std::vector<ChatMessage>& messages) {
  std::string payload = inner_->identity();
  payload += '\x1f';
  payload += inner_->decoding_fingerprint();
  payload += '\x1f';
  payload += render_messages(messages);
  const std::string key = ResponseCache::sha256_hex(payload);

  if (auto hit = cache_->get(key)) return *hit;
  upstream_calls_.fetch_add(1);
  std::string response = inner_->complete(messages);
  return cache_->put_if_absent(key, response);
}

} // namespace structeval
