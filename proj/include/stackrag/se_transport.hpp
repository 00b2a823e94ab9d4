#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/errors.hpp"
#include "stackrag/fs_util.hpp"
#include "stackrag/llm_mock.hpp"

namespace stackrag {

inline std::string url_encode(std::string_view value) {
  static const char* digits = "0123456789ABCDEF";
  std::string out;
  out.reserve(value.size());
  for (unsigned char c : value) {
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                            c == '.' || c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(digits[c >> 4]);
      out.push_back(digits[c & 0xF]);
    }
  }
  return out;
}

struct SeRequest {
  std::string path;  // e.g. "/2.3/search/advanced"
  std::map<std::string, std::string> params;
};

struct SeResponse {
  int status = 0;
  std::string body;
};

// Stable identity of a request used to key recorded fixtures. Parameters
// are emitted in sorted (map) order and the API key is excluded, so the
// same logical request replays identically with or without a key.
inline std::string canonical_signature(const SeRequest& request) {
  std::string out = "GET " + request.path;
  char sep = '?';
  for (const auto& [name, value] : request.params) {
    if (name == "key") continue;
    out.push_back(sep);
    sep = '&';
    out += name;
    out.push_back('=');
    out += url_encode(value);
  }
  return out;
}

inline std::string fixture_file_name(std::string_view signature) {
  return fnv1a64_hex(signature) + ".json";
}

class SeTransport {
 public:
  virtual ~SeTransport() = default;
  virtual SeResponse get(const SeRequest& request) = 0;
};

inline void save_fixture(const std::filesystem::path& dir,
                         const std::string& signature,
                         const SeResponse& response) {
  nlohmann::json doc = {
      {"signature", signature},
      {"status", response.status},
      {"body", response.body},
  };
  atomic_write_file(dir / fixture_file_name(signature), doc.dump(2) + "\n");
}

// Serves recorded responses; any request without a fixture is an error,
// which is what makes offline runs trustworthy.
class ReplaySeTransport : public SeTransport {
 public:
  explicit ReplaySeTransport(std::filesystem::path dir)
      : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
      throw StorageError("fixture directory does not exist: " +
                         dir_.string());
    }
  }

  SeResponse get(const SeRequest& request) override {
    const std::string signature = canonical_signature(request);
    {
      std::lock_guard<std::mutex> lock(mu_);
      requests_.push_back(signature);
    }
    const std::filesystem::path file = dir_ / fixture_file_name(signature);
    auto content = read_file_if_exists(file);
    if (!content) {
      throw FixtureMiss("no fixture recorded for request: " + signature);
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(*content);
    } catch (const nlohmann::json::exception& e) {
      throw StorageError("malformed fixture " + file.string() + ": " +
                         e.what());
    }
    if (doc.value("signature", "") != signature) {
      throw StorageError("fixture " + file.string() +
                         " does not match request signature " + signature);
    }
    SeResponse out;
    out.status = doc.value("status", 200);
    out.body = doc.value("body", "");
    return out;
  }

  std::vector<std::string> requests() const {
    std::lock_guard<std::mutex> lock(mu_);
    return requests_;
  }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::vector<std::string> requests_;
};

// Forwards to a live transport and writes each response down as a fixture.
class RecordingSeTransport : public SeTransport {
 public:
  RecordingSeTransport(std::shared_ptr<SeTransport> inner,
                       std::filesystem::path dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {
    if (!inner_) throw PreconditionError("recording transport needs a backend");
    std::filesystem::create_directories(dir_);
  }

  SeResponse get(const SeRequest& request) override {
    SeResponse response = inner_->get(request);
    save_fixture(dir_, canonical_signature(request), response);
    return response;
  }

 private:
  std::shared_ptr<SeTransport> inner_;
  std::filesystem::path dir_;
};

}  // namespace stackrag
