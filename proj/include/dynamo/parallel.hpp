#pragma once

namespace dynamo {

// Worker cap, resolved once from the DYNAMO_THREADS environment variable:
// unset or 0 means all hardware threads, 1 forces the serial kernels,
// N caps OpenMP at N.
int max_threads();

// True when the parallel kernel variants should be used.
bool parallel_enabled();

// Test hook: override the cap for the current process (0 = re-read env).
void set_max_threads(int n);

}  // namespace dynamo
