#include "freqboot/common.hpp"

#include <utility>

namespace freqboot {

std::mutex& WarningLog::mu() {
  static std::mutex m;
  return m;
}

std::vector<std::string>& WarningLog::log() {
  static std::vector<std::string> v;
  return v;
}

void WarningLog::add(std::string msg) {
  std::lock_guard<std::mutex> lock(mu());
  log().push_back(std::move(msg));
}

std::vector<std::string> WarningLog::drain() {
  std::lock_guard<std::mutex> lock(mu());
  std::vector<std::string> out;
  out.swap(log());
  return out;
}

std::size_t WarningLog::count() {
  std::lock_guard<std::mutex> lock(mu());
  return log().size();
}

}  // namespace freqboot
