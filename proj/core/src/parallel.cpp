#include "mitmp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mitmp
{

namespace
{

std::atomic<int> g_threads{1};

}  // namespace

void SetNumThreads(int threads)
{
  if (threads < 1)
  {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  g_threads.store(threads);
}

int NumThreads()
{
  return g_threads.load();
}

void ParallelFor(int n, const std::function<void(int)> &body)
{
  const int workers = std::min(NumThreads(), n);
  if (workers <= 1)
  {
    for (int i = 0; i < n; i++)
    {
      body(i);
    }
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&]() {
    for (int i = next++; i < n; i = next++)
    {
      try
      {
        body(i);
      }
      catch (...)
      {
        std::lock_guard lock(error_mutex);
        if (!error)
        {
          error = std::current_exception();
        }
        next = n;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; w++)
    {
      pool.emplace_back(run);
    }
    run();
  }
  if (error)
  {
    std::rethrow_exception(error);
  }
}

}  // namespace mitmp
