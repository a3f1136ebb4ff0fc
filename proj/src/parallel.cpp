#include "reaxkit/parallel.hpp"

#include <algorithm>
#include <iomanip>
#include <queue>
#include <sstream>

#include "reaxkit/error.hpp"

namespace reaxkit {

ScheduleMode parse_schedule_mode(const std::string& text) {
  if (text == "static") return ScheduleMode::kStatic;
  if (text == "dynamic") return ScheduleMode::kDynamic;
  throw InputError("schedule mode must be 'static' or 'dynamic', got '" + text + "'");
}

std::string to_string(ScheduleMode mode) { return mode == ScheduleMode::kStatic ? "static" : "dynamic"; }

ThreadPool::ThreadPool(int num_threads, int spin_iterations)
    : num_threads_(num_threads), spin_iterations_(spin_iterations) {
  if (num_threads < 1) throw InputError("thread count must be >= 1");
  workers_.reserve(static_cast<std::size_t>(num_threads - 1));
  for (int t = 1; t < num_threads; ++t) workers_.emplace_back([this, t] { worker_loop(t); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
    generation_.fetch_add(1, std::memory_order_release);
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop(int tid) {
  std::uint64_t seen = 0;
  for (;;) {
    int spins = 0;
    while (generation_.load(std::memory_order_acquire) == seen && spins < spin_iterations_) {
      ++spins;
      if ((spins & 63) == 0) std::this_thread::yield();
    }
    const std::function<void(int)>* job = nullptr;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return generation_.load(std::memory_order_acquire) != seen; });
      seen = generation_.load(std::memory_order_acquire);
      if (stop_) return;
      job = job_;
    }
    try {
      (*job)(tid);
    } catch (...) {
      std::lock_guard lock(error_mutex_);
      if (!error_) error_ = std::current_exception();
    }
    pending_.fetch_sub(1, std::memory_order_acq_rel);
  }
}

void ThreadPool::run(const std::function<void(int)>& fn) {
  if (num_threads_ == 1) {
    fn(0);
    return;
  }
  error_ = nullptr;
  pending_.store(num_threads_ - 1, std::memory_order_release);
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    generation_.fetch_add(1, std::memory_order_release);
  }
  wake_.notify_all();

  std::exception_ptr local_error;
  try {
    fn(0);
  } catch (...) {
    local_error = std::current_exception();
  }
  int spins = 0;
  while (pending_.load(std::memory_order_acquire) != 0) {
    if (++spins > 64) std::this_thread::yield();
  }
  if (local_error) std::rethrow_exception(local_error);
  if (error_) std::rethrow_exception(error_);
}

void parallel_for_chunked(ThreadPool& pool, std::size_t n, const SchedulePolicy& policy, const RangeBody& body) {
  if (n == 0) return;
  const std::size_t chunk = std::max<std::size_t>(1, policy.chunk);
  const std::size_t num_chunks = (n + chunk - 1) / chunk;
  const int threads = pool.size();

  if (threads == 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) body(c * chunk, std::min(n, (c + 1) * chunk), 0);
    return;
  }

  if (policy.mode == ScheduleMode::kStatic) {
    pool.run([&](int tid) {
      for (std::size_t c = static_cast<std::size_t>(tid); c < num_chunks; c += static_cast<std::size_t>(threads)) {
        body(c * chunk, std::min(n, (c + 1) * chunk), tid);
      }
    });
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  pool.run([&](int tid) {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= num_chunks) return;
      try {
        body(c * chunk, std::min(n, (c + 1) * chunk), tid);
      } catch (...) {
        failed.store(true, std::memory_order_relaxed);
        throw;
      }
    }
  });
}

void PrivatizedAccumulator::resize(int threads, std::size_t atoms) {
  forces_.resize(threads, atoms);
  tallies_.assign(static_cast<std::size_t>(threads), ThreadTally{});
  if (dbo_.threads() != threads) dbo_.resize(threads, dbo_.size());
}

void PrivatizedAccumulator::resize_bond_derivatives(std::size_t entries) { dbo_.resize(threads(), entries); }

void PrivatizedAccumulator::zero(ThreadPool& pool) {
  const int nt = threads();
  pool.run([&](int tid) {
    for (int t = tid; t < nt; t += pool.size()) {
      auto& f = forces_.local(t);
      std::fill(f.begin(), f.end(), Vec3{});
      auto& d = dbo_.local(t);
      std::fill(d.begin(), d.end(), 0.0);
      tallies_[static_cast<std::size_t>(t)] = ThreadTally{};
    }
  });
}

std::array<double, kNumEnergyTerms> PrivatizedAccumulator::energies() const {
  std::array<double, kNumEnergyTerms> out{};
  for (const auto& t : tallies_) {
    for (int k = 0; k < kNumEnergyTerms; ++k) out[static_cast<std::size_t>(k)] += t.energy[static_cast<std::size_t>(k)];
  }
  return out;
}

std::array<double, 9> PrivatizedAccumulator::virial() const {
  std::array<double, 9> out{};
  for (const auto& t : tallies_) {
    for (std::size_t k = 0; k < 9; ++k) out[k] += t.virial[k];
  }
  return out;
}

std::array<double, kNumEnergyTerms> reduce_privatized(ThreadPool& pool, const PrivatizedAccumulator& acc,
                                                       std::span<Vec3> out) {
  acc.forces().reduce(pool, out);
  return acc.energies();
}

const std::vector<std::string>& PerfCounters::kernel_names() {
  static const std::vector<std::string> names = {"write-lists", "init-forces", "bond-orders",      "3-body",
                                                 "4-body",      "nonbonded",   "aggregate-forces", "qeq",
                                                 "species",     "other"};
  return names;
}

void PerfCounters::record(const std::string& kernel, double seconds) {
  const auto& names = kernel_names();
  const bool known = std::find(names.begin(), names.end(), kernel) != names.end();
  totals_[known ? kernel : "other"] += seconds;
  ++count_;
}

double PerfCounters::seconds(const std::string& kernel) const {
  const auto it = totals_.find(kernel);
  return it == totals_.end() ? 0.0 : it->second;
}

double PerfCounters::total() const {
  double t = 0.0;
  for (const auto& name : kernel_names()) t += seconds(name);
  return t;
}

void PerfCounters::clear() {
  totals_.clear();
  count_ = 0;
}

std::vector<PerfCounters::Row> PerfCounters::report() const {
  std::vector<Row> rows;
  if (empty()) return rows;
  const double tot = total();
  for (const auto& name : kernel_names()) {
    const double s = seconds(name);
    rows.push_back({name, s, tot > 0.0 ? 100.0 * s / tot : 0.0});
  }
  return rows;
}

std::string PerfCounters::csv() const {
  std::ostringstream out;
  out << "kernel,seconds,percent\n";
  out << std::setprecision(6);
  for (const auto& row : report()) out << row.kernel << ',' << row.seconds << ',' << row.percent << '\n';
  out << "total," << total() << ',' << (empty() ? 0.0 : 100.0) << '\n';
  return out.str();
}

std::vector<double> simulate_assigned_cost(std::span<const double> costs, const SchedulePolicy& policy, int threads) {
  if (threads < 1) throw InputError("thread count must be >= 1");
  const std::size_t n = costs.size();
  const std::size_t chunk = std::max<std::size_t>(1, policy.chunk);
  const std::size_t num_chunks = (n + chunk - 1) / chunk;
  std::vector<double> assigned(static_cast<std::size_t>(threads), 0.0);

  auto chunk_cost = [&](std::size_t c) {
    double s = 0.0;
    for (std::size_t i = c * chunk; i < std::min(n, (c + 1) * chunk); ++i) s += costs[i];
    return s;
  };

  if (policy.mode == ScheduleMode::kStatic) {
    for (std::size_t c = 0; c < num_chunks; ++c) assigned[c % static_cast<std::size_t>(threads)] += chunk_cost(c);
    return assigned;
  }

  // (finish time, thread id), earliest first
  using Slot = std::pair<double, int>;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> free_at;
  for (int t = 0; t < threads; ++t) free_at.push({0.0, t});
  for (std::size_t c = 0; c < num_chunks; ++c) {
    auto [time, tid] = free_at.top();
    free_at.pop();
    const double cost = chunk_cost(c);
    assigned[static_cast<std::size_t>(tid)] += cost;
    free_at.push({time + cost, tid});
  }
  return assigned;
}

}  // namespace reaxkit
