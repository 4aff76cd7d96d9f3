#pragma once

#include <stdexcept>

namespace neurocoarse {

// File-system level failure (open/read/write); distinct from validation and
// numerical errors so callers can map exit codes.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every direct escape run hit the step cap without crossing the threshold.
struct AllRunsCensored : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace neurocoarse
