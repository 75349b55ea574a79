#include "scanreg/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace scanreg {

namespace {

bool recoverable(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::degenerate_zone:
    case ErrorCode::zero_total:
    case ErrorCode::degenerate_outcome:
    case ErrorCode::degenerate_variance:
    case ErrorCode::rank_deficient:
    case ErrorCode::non_convergence:
      return true;
    default:
      return false;
  }
}

double tie_tolerance(double best) noexcept {
  return std::isinf(best) ? 0.0 : 1e-9 * std::max(1.0, std::abs(best));
}

}  // namespace

unsigned default_threads() {
  if (const char* env = std::getenv("SCANREG_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = default_threads();
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) run(i);
  } else {
    constexpr std::size_t chunk = 16;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) return;
        const std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) run(i);
      }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::unique_ptr<ZoneEvaluator> make_evaluator(const RegionTable& table, const ModelSpec& spec, const GlmOptions& glm) {
  if (spec.glm) return std::make_unique<GlmStatistic>(table, spec, glm);
  check_table_for(table, spec);
  return std::make_unique<ClosedFormStatistic>(spec, table.outcome(), table.baseline(), table.variance());
}

void rank_zones(ScanResult& result, const ZoneSet& zones, const ScanOptions& options) {
  result.ranking.clear();
  result.top.clear();
  result.mlc_id = 0;
  for (const auto& r : result.records) {
    if (r.usable()) result.ranking.push_back(r.zone_id);
  }
  auto llr = [&](std::size_t id) { return result.records[id - 1].llr; };
  std::sort(result.ranking.begin(), result.ranking.end(), [&](std::size_t a, std::size_t b) {
    if (llr(a) != llr(b)) return llr(a) > llr(b);
    if (result.records[a - 1].size != result.records[b - 1].size) {
      return result.records[a - 1].size < result.records[b - 1].size;
    }
    return a < b;
  });
  if (result.ranking.empty()) return;

  const double best = llr(result.ranking.front());
  const double tol = tie_tolerance(best);
  if (best <= 1e-9) return;
  auto chosen = result.ranking.begin();
  for (auto it = result.ranking.begin(); it != result.ranking.end() && llr(*it) >= best - tol; ++it) {
    const auto& c = result.records[*it - 1];
    const auto& m = result.records[*chosen - 1];
    if (c.size < m.size || (c.size == m.size && c.zone_id < m.zone_id)) chosen = it;
  }
  result.mlc_id = *chosen;
  std::rotate(result.ranking.begin(), chosen, chosen + 1);

  std::vector<char> covered(options.non_overlapping ? zones.index_size() : 0, 0);
  for (std::size_t id : result.ranking) {
    if (result.top.size() >= options.top) break;
    if (llr(id) <= 1e-9) break;
    if (options.non_overlapping) {
      const auto& members = zones.zone(id).members;
      if (std::any_of(members.begin(), members.end(), [&](std::uint32_t i) { return covered[i] != 0; })) continue;
      for (std::uint32_t i : members) covered[i] = 1;
    }
    result.top.push_back(id);
  }
}

ScanResult scan(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const ScanOptions& options) {
  if (zones.size() == 0) throw Error(ErrorCode::invalid_argument, "zone set is empty");
  if (zones.index_size() != table.size()) {
    throw Error(ErrorCode::invalid_argument, "zone set indexes " + std::to_string(zones.index_size()) +
                                                 " rows but the table has " + std::to_string(table.size()));
  }
  std::unique_ptr<ZoneEvaluator> evaluator;
  try {
    evaluator = make_evaluator(table, spec, options.glm);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::zero_total || e.code() == ErrorCode::degenerate_outcome ||
        e.code() == ErrorCode::degenerate_variance) {
      throw Error(ErrorCode::empty_result, std::string("no zone can be evaluated: ") + e.what());
    }
    throw;
  }

  ScanResult result;
  result.model = spec;
  result.records.resize(zones.size());
  parallel_for(zones.size(), options.threads ? options.threads : default_threads(), [&](std::size_t k) {
    const Zone& zone = zones.zones()[k];
    ZoneRecord& rec = result.records[k];
    rec.zone_id = zone.id;
    rec.size = zone.size();
    try {
      FitReport fit = evaluator->evaluate(zone.members);
      rec.llr = fit.llr;
      rec.theta = fit.theta;
      rec.alpha = fit.alpha;
      rec.sigma2 = fit.sigma2;
      rec.beta = std::move(fit.beta);
      rec.degenerate_variance = fit.degenerate_variance;
      if (options.sidedness == Sidedness::hot) rec.filtered = !(rec.theta > 0.0);
      if (options.sidedness == Sidedness::cold) rec.filtered = !(rec.theta < 0.0);
    } catch (const Error& e) {
      if (!recoverable(e.code())) throw;
      rec.error = e.code();
      rec.llr = 0.0;
    }
  });

  for (const auto& r : result.records) result.errored += r.error ? 1 : 0;
  if (result.errored == result.records.size()) {
    throw Error(ErrorCode::empty_result, "every zone is degenerate for model " + model_name(spec) + " (first: " +
                                             std::string(to_string(*result.records.front().error)) + ")");
  }
  rank_zones(result, zones, options);
  return result;
}

}  // namespace scanreg
