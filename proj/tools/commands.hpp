#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hwbcli {

struct Common {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::size_t> resolution;
  bool quiet = false;
};

int ground_state(const Common& c);
int profiles(const Common& c);
int run(const Common& c, const std::vector<double>& schedule);
int diagnose(const Common& c);
int verify(const Common& c);

}  // namespace hwbcli
