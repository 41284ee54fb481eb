#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rolle/learning/batch_generator.hpp"
#include "rolle/learning/train.hpp"

namespace rolle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Dispatches a subcommand; never throws.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

// Bin histogram of the recorded steering and of the seeded label stream the
// batch generator would produce from it.
struct SteeringHistExport {
  int bins = 0;
  std::vector<double> edges;
  std::vector<std::uint64_t> counts_before;
  std::vector<std::uint64_t> counts_after;
  double mean_before = 0.0;
  double mean_after = 0.0;
  double flip_prob = 0.0;
  std::uint64_t seed = 0;
};

SteeringHistExport steering_hist_export(std::span<const double> steering, int bins,
                                        const learning::Hyperparams& h);

// JSON documents consumed by the cockpit charts.
std::string history_json(const learning::TrainHistory& history);
std::string steering_hist_json(const SteeringHistExport& e);

// One-line JSON object; reals print with 4 decimals, counts as integers.
using JsonValue = std::variant<double, std::uint64_t>;
std::string format4_json(const std::vector<std::pair<std::string, JsonValue>>& fields);

}  // namespace rolle::cli
