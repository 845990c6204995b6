#pragma once

namespace abstain {

/// Number of worker threads parallel kernels may use.  Honors the
/// ABSTAIN_THREADS environment variable (positive integer cap); otherwise the
/// OpenMP default.  Returns 1 when built without OpenMP.
int max_threads();

}  // namespace abstain
