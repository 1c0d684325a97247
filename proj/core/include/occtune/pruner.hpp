#pragma once

// Autotuning parameter grid and its static pruning.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occtune/occupancy.hpp"

namespace occtune {

struct TuningSpace {
  std::vector<int> tc{};                // threads per block
  std::vector<int> bc{};                // block counts
  std::vector<int> uif{};               // unroll factors
  std::vector<int> pl{};                // preferred L1 size, KB
  std::vector<std::string> cflags{};    // compiler flag sets
  std::vector<int> sc{};                // optional extra dimension; empty = absent

  // TC 32..1024/32, BC 24..192/24, UIF 1..5, PL {16,48}, CFLAGS {"", "-use_fast_math"}.
  static TuningSpace defaults();

  // Non-empty lists, distinct values, TC positive multiples of 32.
  // Throws Error{Invariant} naming the parameter.
  void validate() const;

  bool operator==(const TuningSpace&) const = default;
};

std::int64_t grid_size(const TuningSpace& space);

// Orio-style annotation syntax:
//   param TC[] = range(32,1025,32);
//   param PL[] = [16,48];
//   param CFLAGS[] = ['', '-use_fast_math'];
// Parameters left out keep their defaults. Throws Error{Parse} with line.
TuningSpace parse_tuning_space(std::string_view text);
TuningSpace load_tuning_space(const std::filesystem::path& path);
std::string to_spec_text(const TuningSpace& space);

enum class PruneRule { StaticOnly, StaticPlusIntensity };

std::string_view to_string(PruneRule rule);

inline constexpr double kIntensityThreshold = 4.0;

struct PruneReport {
  std::int64_t original_size = 0;
  std::int64_t pruned_size = 0;
  std::vector<int> kept_tc;
  PruneRule rule = PruneRule::StaticOnly;
  double reduction = 0;  // 1 - pruned/original
  std::optional<double> intensity;
  double threshold = kIntensityThreshold;
};

// kept TC = TC ∩ T*, in TC order. Throws Error{NoCandidates} when empty.
PruneReport static_prune(const TuningSpace& space, const SuggestionReport& suggestion);

// Static prune, then the upper ceil(k/2) candidates when intensity exceeds
// the threshold, else the lower ceil(k/2). kept TC is ascending.
PruneReport rule_prune(const TuningSpace& space, const SuggestionReport& suggestion,
                       double intensity, double threshold = kIntensityThreshold);

// `space` with TC replaced by the report's kept values.
TuningSpace apply(const TuningSpace& space, const PruneReport& report);

struct Variant {
  int tc = 0;
  int bc = 0;
  int uif = 0;
  int pl = 0;
  std::string cflags;
  std::optional<int> sc;

  auto operator<=>(const Variant&) const = default;
};

// Restartable view over every variant, in list order with CFLAGS (then SC)
// varying fastest. For sorted lists this is lexicographic order.
class VariantRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Variant;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const TuningSpace* space, std::int64_t index) : space_(space), index_(index) {}

    Variant operator*() const;
    iterator& operator++() {
      ++index_;
      return *this;
    }
    iterator operator++(int) {
      auto old = *this;
      ++index_;
      return old;
    }
    bool operator==(const iterator& other) const { return index_ == other.index_; }

   private:
    const TuningSpace* space_ = nullptr;
    std::int64_t index_ = 0;
  };

  explicit VariantRange(const TuningSpace& space) : space_(&space), size_(grid_size(space)) {}

  iterator begin() const { return {space_, 0}; }
  iterator end() const { return {space_, size_}; }
  std::int64_t size() const { return size_; }

 private:
  const TuningSpace* space_;
  std::int64_t size_;
};

// The space must outlive the returned range.
VariantRange enumerate(const TuningSpace& space);

}  // namespace occtune
