#pragma once

#include <filesystem>
#include <stdexcept>

namespace smsroute {

class FileNotFound : public std::runtime_error {
 public:
  explicit FileNotFound(const std::filesystem::path& p) : std::runtime_error("file not found: " + p.string()) {}
};

}  // namespace smsroute
