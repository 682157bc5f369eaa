#pragma once

// Execution policy shared by the kernels that have both a serial reference
// path and an OpenMP path. Both paths compute every element with the same code
// and reduce in index order, so their results are bit-identical.

namespace lowlying {

enum class Exec { serial, parallel };

/// Number of OpenMP threads used by Exec::parallel kernels (<= 0: runtime default).
void set_thread_count(int threads);
int thread_count();

}  // namespace lowlying
