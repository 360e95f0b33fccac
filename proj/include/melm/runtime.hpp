#pragma once

namespace melm {

/// Caps the number of threads used by parallel kernels and multistart.
/// 0 restores the library default (all hardware threads). Thread count never
/// changes numeric results: reductions run over fixed-size chunks combined in
/// index order.
void set_max_threads(int n);

/// Resolved thread cap, always >= 1.
int max_threads();

}  // namespace melm
