#pragma once

namespace bootrl {

// Which variant of a data-parallel kernel to run. The serial variants are the
// reference implementations; the parallel ones (OpenMP) must produce
// bitwise-identical results.
enum class Execution { serial, parallel };

// Number of worker threads the parallel kernels will use.
int parallel_threads();

}  // namespace bootrl
