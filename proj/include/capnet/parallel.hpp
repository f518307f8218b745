#pragma once

namespace capnet::parallel {

/// Sets the OpenMP team size for later kernels; n <= 0 restores the default.
void set_threads(int n);
int max_threads();

}  // namespace capnet::parallel
