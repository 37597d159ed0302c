#ifndef MITMP_PARALLEL_HPP
#define MITMP_PARALLEL_HPP

#include <functional>

namespace mitmp
{

// Worker count used by the embarrassingly parallel loops (matrix assembly,
// per-candidate imaging). Defaults to 1; values < 1 select the hardware
// concurrency.
void SetNumThreads(int threads);
int NumThreads();

// Calls body(i) for i in [0, n), distributing indices over NumThreads()
// workers. The first exception thrown by any call is rethrown.
void ParallelFor(int n, const std::function<void(int)> &body);

}  // namespace mitmp

#endif  // MITMP_PARALLEL_HPP
