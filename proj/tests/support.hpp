#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include <unistd.h>

#include "xqd/error.hpp"

namespace testing_support {

/// Code of the xqd::Error thrown by fn; records a failure if none is thrown.
template <typename Fn>
xqd::Errc error_of(Fn&& fn) {
  try {
    fn();
  } catch (const xqd::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no xqd::Error thrown";
  return xqd::Errc::Io;
}

/// Message of the xqd::Error thrown by fn, empty if none.
template <typename Fn>
std::string error_message(Fn&& fn) {
  try {
    fn();
  } catch (const xqd::Error& e) {
    return e.what();
  }
  return {};
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("xqd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
