#pragma once

// Threading runtime: a persistent worker pool, chunked static/dynamic loop
// scheduling, per-thread (privatized) accumulation buffers with a fixed-order
// reduction, and per-kernel wall-time counters.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "reaxkit/vec3.hpp"

namespace reaxkit {

enum class ScheduleMode { kStatic, kDynamic };

struct SchedulePolicy {
  ScheduleMode mode = ScheduleMode::kDynamic;
  std::size_t chunk = 20;  // atoms per task
};

ScheduleMode parse_schedule_mode(const std::string& text);
std::string to_string(ScheduleMode mode);

/// Fixed-size pool.  The calling thread participates as thread 0, so a pool
/// of size T owns T-1 background workers.  Between phases workers spin for a
/// short while and then park on a condition variable.
class ThreadPool {
 public:
  explicit ThreadPool(int num_threads, int spin_iterations = 2000);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return num_threads_; }

  /// Runs fn(tid) once on every thread and waits for all of them.  The first
  /// exception thrown by any thread is rethrown here after all threads finish.
  void run(const std::function<void(int)>& fn);

 private:
  void worker_loop(int tid);

  int num_threads_;
  int spin_iterations_;
  std::vector<std::thread> workers_;

  std::mutex mutex_;
  std::condition_variable wake_;
  std::atomic<std::uint64_t> generation_{0};
  std::atomic<int> pending_{0};
  bool stop_ = false;
  const std::function<void(int)>* job_ = nullptr;

  std::mutex error_mutex_;
  std::exception_ptr error_;
};

using RangeBody = std::function<void(std::size_t begin, std::size_t end, int tid)>;

/// Executes body over [0, n) split into chunks of `policy.chunk` indices.
/// Dynamic mode hands out chunks from a shared counter; static mode assigns
/// chunk m to thread m % T.  Every index runs exactly once.
void parallel_for_chunked(ThreadPool& pool, std::size_t n, const SchedulePolicy& policy, const RangeBody& body);

/// Per-thread copies of a length-n array of T.  Each thread writes only its
/// own copy; reduce() sums copies in ascending thread order.
template <typename T>
class Privatized {
 public:
  Privatized() = default;
  Privatized(int threads, std::size_t n) { resize(threads, n); }

  void resize(int threads, std::size_t n) {
    buffers_.assign(static_cast<std::size_t>(threads), std::vector<T>(n, T{}));
  }
  int threads() const { return static_cast<int>(buffers_.size()); }
  std::size_t size() const { return buffers_.empty() ? 0 : buffers_[0].size(); }

  std::vector<T>& local(int tid) { return buffers_[static_cast<std::size_t>(tid)]; }
  const std::vector<T>& local(int tid) const { return buffers_[static_cast<std::size_t>(tid)]; }

  void zero(ThreadPool& pool) {
    pool.run([&](int tid) {
      if (tid < threads()) std::fill(local(tid).begin(), local(tid).end(), T{});
    });
  }

  /// out[i] = Σ_t buf[t][i] with t ascending; parallel over i.
  void reduce(ThreadPool& pool, std::span<T> out) const {
    const std::size_t n = size();
    const SchedulePolicy fixed{ScheduleMode::kStatic, std::max<std::size_t>(1, (n + pool.size() - 1) / pool.size())};
    parallel_for_chunked(pool, n, fixed, [&](std::size_t b, std::size_t e, int) {
      for (std::size_t i = b; i < e; ++i) {
        T sum = buffers_[0][i];
        for (std::size_t t = 1; t < buffers_.size(); ++t) sum += buffers_[t][i];
        out[i] = sum;
      }
    });
  }

 private:
  std::vector<std::vector<T>> buffers_;
};

/// Energy slots tallied by the force kernels.
enum class EnergyTerm : int { kBond, kOver, kAngle, kTorsion, kHBond, kVdw, kCoulomb, kPolarization, kCount };
inline constexpr int kNumEnergyTerms = static_cast<int>(EnergyTerm::kCount);

struct alignas(64) ThreadTally {
  std::array<double, kNumEnergyTerms> energy{};
  std::array<double, 9> virial{};  // row-major 3×3, Σ d ⊗ f
};

/// Thread-private force, energy, virial and dE/dBO buffers for one force
/// evaluation.  Kernels call the add_* helpers with their thread id.
class PrivatizedAccumulator {
 public:
  PrivatizedAccumulator() = default;
  PrivatizedAccumulator(int threads, std::size_t atoms) { resize(threads, atoms); }

  void resize(int threads, std::size_t atoms);
  /// Sizes the per-thread dE/dBO buffers to the bond-list entry count.
  void resize_bond_derivatives(std::size_t entries);
  void zero(ThreadPool& pool);

  int threads() const { return forces_.threads(); }
  std::size_t atoms() const { return forces_.size(); }

  void add_force(int tid, std::size_t i, const Vec3& f) { forces_.local(tid)[i] += f; }

  /// Applies f to atom i and -f to atom j, where d = r_j - r_i.
  void add_pair_force(int tid, std::size_t i, std::size_t j, const Vec3& d, const Vec3& f_on_i) {
    auto& buf = forces_.local(tid);
    buf[i] += f_on_i;
    buf[j] -= f_on_i;
    auto& v = tallies_[static_cast<std::size_t>(tid)].virial;
    // r_i - r_j = -d; virial = Σ (r_i - r_j) ⊗ f_i
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) v[static_cast<std::size_t>(3 * a + b)] -= d[a] * f_on_i[b];
    }
  }

  void add_energy(int tid, EnergyTerm term, double e) {
    tallies_[static_cast<std::size_t>(tid)].energy[static_cast<std::size_t>(term)] += e;
  }

  std::vector<double>& bond_derivative(int tid) { return dbo_.local(tid); }
  const Privatized<double>& bond_derivatives() const { return dbo_; }

  const Privatized<Vec3>& forces() const { return forces_; }

  /// Per-term energies summed over threads in ascending order.
  std::array<double, kNumEnergyTerms> energies() const;
  std::array<double, 9> virial() const;

 private:
  Privatized<Vec3> forces_;
  Privatized<double> dbo_;
  std::vector<ThreadTally> tallies_;
};

/// Reduces the privatized forces into `out` (ascending thread order, parallel
/// over atoms) and returns the per-term energy totals.
std::array<double, kNumEnergyTerms> reduce_privatized(ThreadPool& pool, const PrivatizedAccumulator& acc,
                                                       std::span<Vec3> out);

/// Wall-time totals per named kernel.  Unknown names are booked under "other".
class PerfCounters {
 public:
  static const std::vector<std::string>& kernel_names();

  void record(const std::string& kernel, double seconds);
  double seconds(const std::string& kernel) const;
  double total() const;
  bool empty() const { return count_ == 0; }
  void clear();

  struct Row {
    std::string kernel;
    double seconds;
    double percent;
  };
  /// One row per known kernel, in kernel_names() order.
  std::vector<Row> report() const;
  /// CSV `kernel,seconds,percent` plus a final `total` row.
  std::string csv() const;

 private:
  std::map<std::string, double> totals_;
  std::size_t count_ = 0;
};

/// Books the wall time of its own lifetime under a kernel name.
class KernelTimer {
 public:
  KernelTimer(PerfCounters* counters, std::string kernel)
      : counters_(counters), kernel_(std::move(kernel)), start_(std::chrono::steady_clock::now()) {}
  ~KernelTimer() {
    if (counters_ != nullptr) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
      counters_->record(kernel_, dt.count());
    }
  }
  KernelTimer(const KernelTimer&) = delete;
  KernelTimer& operator=(const KernelTimer&) = delete;

 private:
  PerfCounters* counters_;
  std::string kernel_;
  std::chrono::steady_clock::time_point start_;
};

/// What every parallel kernel needs: the pool, the loop schedule and an
/// optional place to book timings.
struct ExecContext {
  ThreadPool* pool = nullptr;
  SchedulePolicy policy{};
  PerfCounters* perf = nullptr;

  int threads() const { return pool->size(); }
  void for_each(std::size_t n, const RangeBody& body) const { parallel_for_chunked(*pool, n, policy, body); }
};

/// Per-thread assigned cost when `costs` is scheduled over `threads` workers.
/// Static mode deals chunks round-robin.  Dynamic mode models the shared
/// counter: each chunk goes to the worker that becomes free first (ties to
/// the lowest thread id), with cost as the unit of time.
std::vector<double> simulate_assigned_cost(std::span<const double> costs, const SchedulePolicy& policy, int threads);

}  // namespace reaxkit
