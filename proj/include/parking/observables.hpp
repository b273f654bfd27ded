#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "parking/state.hpp"

namespace parking {

enum class NearestLabel : std::uint8_t { CloserToCar, CloserToSpot, Tie, NonEmpty };

std::string_view to_string(NearestLabel label);

struct NearestTypeMap {
  std::vector<NearestLabel> labels;
  double frac_closer_car{0.0};
  double frac_closer_spot{0.0};
  double frac_tie{0.0};
  bool degenerate{false};  // no non-empty site at all
};

/// Non-empty sites host an unparked car or are a vacant spot (occupied spots
/// count as empty). Empty sites take the type of the nearest non-empty site
/// in undirected graph distance, Tie on equal distance.
NearestTypeMap nearest_type_classify(const Topology& topology, const Snapshot& snap);

struct ObservableRow {
  std::uint64_t t{0};
  double vbar{0.0};
  double vbar_sq{0.0};
  std::uint32_t unparked_cars{0};
  std::uint32_t vacant_spots{0};
  double frac_spot_unvisited{0.0};
  double frac_closer_spot{0.0};
  double frac_closer_car{0.0};
  double frac_tie{0.0};
};

/// Nearest-type fractions are filled only when with_nearest is set; otherwise NaN.
ObservableRow observables_row(const SimState& state, bool with_nearest = true);

}  // namespace parking
