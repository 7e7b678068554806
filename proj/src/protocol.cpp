#include "spinecho/protocol.hpp"

#include "spinecho/error.hpp"
#include "spinecho/io.hpp"
#include "spinecho/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace spinecho {

namespace {

int worker_count(int requested, int jobs) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    return std::clamp(n, 1, std::max(jobs, 1));
}

// Runs job(r) for r in [0, n) on a small pool. Results are stored by index, so
// the caller reduces them in a fixed order regardless of scheduling.
template <class Job>
std::vector<Eigen::MatrixXd> for_each_realization(int n, int threads, Job&& job,
                                                  const ProgressFn& progress) {
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    std::exception_ptr failure;
    std::mutex lock;
    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= n) return;
            {
                std::lock_guard guard(lock);
                if (failure) return;
            }
            try {
                out[static_cast<std::size_t>(r)] = job(r);
            } catch (...) {
                std::lock_guard guard(lock);
                if (!failure) failure = std::current_exception();
                return;
            }
            const int finished = ++done;
            if (progress) {
                std::lock_guard guard(lock);
                progress(finished, n);
            }
        }
    };
    const int workers = worker_count(threads, n);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

void check_config(const ExperimentConfig& config) {
    config.ensemble.validate();
    if (config.n_realizations < 1) {
        throw ConfigError("n_realizations must be >= 1");
    }
    if (config.threads < 0) {
        throw ConfigError("threads must be >= 0");
    }
    if (config.ensemble.d.is_finite() && !config.ensemble.density) {
        throw ConfigError("density is unresolved; call resolve_experiment first");
    }
}

ResponseSeries assemble(const std::vector<Eigen::MatrixXd>& raw, Eigen::Index channel, Axis alpha,
                        const std::vector<double>& times, const std::vector<int>& echo_index) {
    const auto n_real = static_cast<Eigen::Index>(raw.size());
    const auto n_times = static_cast<Eigen::Index>(times.size());
    ResponseSeries s;
    s.alpha = alpha;
    s.times = times;
    s.echo_index = echo_index;
    s.n_realizations = static_cast<int>(n_real);
    s.samples.resize(n_real, n_times);
    for (Eigen::Index r = 0; r < n_real; ++r) {
        const double norm = raw[static_cast<std::size_t>(r)](channel, 0);
        if (!(norm > 0.0)) {
            throw NumericalError("typicality normalization vanished");
        }
        s.samples.row(r) = raw[static_cast<std::size_t>(r)].row(channel) / norm;
        s.samples(r, 0) = 1.0;
    }
    s.mean.resize(static_cast<std::size_t>(n_times));
    s.std_error.resize(static_cast<std::size_t>(n_times));
    for (Eigen::Index k = 0; k < n_times; ++k) {
        const auto col = s.samples.col(k);
        const double m = col.mean();
        double se = 0.0;
        if (n_real > 1) {
            const double var = (col.array() - m).square().sum() / static_cast<double>(n_real - 1);
            se = std::sqrt(var / static_cast<double>(n_real));
        }
        s.mean[static_cast<std::size_t>(k)] = m;
        s.std_error[static_cast<std::size_t>(k)] = se;
    }
    return s;
}

std::vector<int> echo_indices(const std::vector<double>& times, double tau) {
    std::vector<int> idx;
    idx.reserve(times.size());
    for (double t : times) {
        const double n = std::round(t / (2.0 * tau));
        idx.push_back(std::abs(t - 2.0 * n * tau) <= 1e-9 * std::max(tau, t) ? static_cast<int>(n) : -1);
    }
    return idx;
}

// Trotter without an explicit step: each realization picks its own step by
// the convergence gate, since a single close pair sets the required resolution.
struct TrotterGate {
    double interval = 0.0;
    std::mutex lock;
    double min_step = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool active(const ExperimentConfig& config) const {
        return config.plan.method == EvolutionMethod::Trotter2 && config.plan.trotter_step == 0.0 &&
               config.variant == ModelVariant::Full;
    }
    [[nodiscard]] nlohmann::json describe() const {
        return {{"interval", interval}, {"min_step", min_step}};
    }
};

Eigen::MatrixXd run_one(const ExperimentConfig& config, const PulseModel& pulse,
                        const Schedule& schedule, std::span<const Axis> channels, int r,
                        TrotterGate& gate) {
    const auto index = static_cast<std::uint64_t>(r);
    const DisorderRealization realization = make_realization(config.ensemble, index);
    const SpinModel model = build_model(realization, config.variant);
    EvolutionPlan plan = config.plan;
    if (gate.active(config)) {
        plan.trotter_step = converged_trotter_step(model, gate.interval);
        std::lock_guard guard(gate.lock);
        gate.min_step = std::min(gate.min_step, plan.trotter_step);
    }
    Propagator propagator(model, plan);
    PulseModel p = pulse;
    p.seed = realization_pulse_seed(pulse.seed, index);
    const PulseTrain train(p, realization.n_spins());
    return response_estimate(propagator, train, schedule, channels,
                             realization_state_seed(config.ensemble.seed, index));
}

}  // namespace

std::vector<std::size_t> ResponseSeries::echo_records() const {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < echo_index.size(); ++k) {
        if (echo_index[k] >= 0) idx.push_back(k);
    }
    return idx;
}

std::uint64_t realization_state_seed(std::uint64_t master, std::uint64_t index) {
    return derive_seed(master, index, Stream::State);
}

std::uint64_t realization_pulse_seed(std::uint64_t master, std::uint64_t index) {
    return derive_seed(master, index, Stream::PulseSpin);
}

nlohmann::json describe(const ExperimentConfig& config) { return to_json(config); }

ExperimentConfig resolve_experiment(ExperimentConfig config) {
    config.ensemble.validate();
    config.ensemble = resolve_density(config.ensemble, config.calibration);
    return config;
}

ResponseSeries run_hahn(const ExperimentConfig& config, std::span<const double> total_times,
                        const ProgressFn& progress) {
    check_config(config);
    if (total_times.empty()) {
        throw ConfigError("Hahn time grid is empty");
    }
    for (std::size_t k = 0; k < total_times.size(); ++k) {
        if (!(total_times[k] > 0.0) || (k > 0 && !(total_times[k] > total_times[k - 1]))) {
            throw ConfigError("Hahn times must be positive and strictly increasing");
        }
    }
    TrotterGate gate;
    gate.interval = 0.5 * total_times.back();
    const Schedule schedule = hahn_schedule(total_times);
    const Axis channel[] = {Axis::X};
    const PulseModel ideal = PulseModel::ideal();
    auto raw = for_each_realization(
        config.n_realizations, config.threads,
        [&](int r) { return run_one(config, ideal, schedule, channel, r, gate); }, progress);

    std::vector<double> times = schedule.record_times();
    std::vector<int> echo(times.size(), 1);
    echo[0] = 0;
    ResponseSeries s = assemble(raw, 0, Axis::X, times, echo);
    s.metadata = {{"schema_version", kSchemaVersion},
                  {"experiment", "hahn"},
                  {"alpha", std::string(1, axis_label(Axis::X))},
                  {"config", describe(config)},
                  {"n_realizations", s.n_realizations}};
    if (gate.active(config)) s.metadata["trotter_gate"] = gate.describe();
    return s;
}

std::vector<ResponseSeries> run_cpmg(const ExperimentConfig& config, const SequenceSpec& sequence,
                                     std::span<const Axis> channels, const ProgressFn& progress) {
    check_config(config);
    sequence.validate();
    if (sequence.kind == SequenceKind::Hahn) {
        throw ConfigError("run_cpmg needs a CPMG or APCP sequence");
    }
    if (channels.empty()) {
        throw ConfigError("at least one channel is required");
    }
    PulseModel pulse = config.pulse;
    if (sequence.kind == SequenceKind::APCP) {
        pulse.axis = AxisPolicy::AlternatingX;
    }
    ExperimentConfig used = config;
    TrotterGate gate;
    gate.interval = sequence.tau;
    used.pulse = pulse;

    const Schedule schedule = cpmg_schedule(sequence);
    auto raw = for_each_realization(
        config.n_realizations, config.threads,
        [&](int r) { return run_one(used, pulse, schedule, channels, r, gate); }, progress);

    const std::vector<double> times = schedule.record_times();
    const std::vector<int> echo = echo_indices(times, sequence.tau);
    std::vector<ResponseSeries> out;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        ResponseSeries s = assemble(raw, static_cast<Eigen::Index>(c), channels[c], times, echo);
        s.metadata = {{"schema_version", kSchemaVersion},
                      {"experiment", sequence_name(sequence.kind)},
                      {"alpha", std::string(1, axis_label(channels[c]))},
                      {"config", describe(used)},
                      {"sequence", to_json(sequence)},
                      {"n_realizations", s.n_realizations}};
        if (gate.active(used)) s.metadata["trotter_gate"] = gate.describe();
        out.push_back(std::move(s));
    }
    return out;
}

ResponseSeries run_longitudinal(const ExperimentConfig& config, const SequenceSpec& sequence,
                                const ProgressFn& progress) {
    const Axis channel[] = {Axis::Z};
    auto series = run_cpmg(config, sequence, channel, progress);
    series.front().metadata["experiment"] = "longitudinal";
    return std::move(series.front());
}

WindowStat window_mean(const ResponseSeries& series, double t_min, double t_max, bool echoes_only) {
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double t = series.times[k];
        if (t >= t_min && t <= t_max && (!echoes_only || series.echo_index[k] >= 0)) {
            cols.push_back(k);
        }
    }
    if (cols.empty()) {
        throw ConfigError("time window contains no records");
    }
    WindowStat w;
    w.n_points = static_cast<int>(cols.size());
    const Eigen::Index n = series.samples.rows();
    if (n == 0) {
        for (auto k : cols) w.mean += series.mean[k];
        w.mean /= static_cast<double>(cols.size());
        return w;
    }
    Eigen::VectorXd per(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        double sum = 0.0;
        for (auto k : cols) sum += series.samples(r, static_cast<Eigen::Index>(k));
        per(r) = sum / static_cast<double>(cols.size());
    }
    w.mean = per.mean();
    if (n > 1) {
        w.std_error = std::sqrt((per.array() - w.mean).square().sum() /
                                static_cast<double>(n - 1) / static_cast<double>(n));
    }
    return w;
}

AsymmetryMetric even_odd_asymmetry(const ResponseSeries& series, double t_min, double t_max,
                                   double floor) {
    std::vector<std::size_t> even;
    std::vector<std::size_t> odd;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const int n = series.echo_index[k];
        const double t = series.times[k];
        if (n < 1 || t < t_min || t > t_max) continue;
        (n % 2 == 0 ? even : odd).push_back(k);
    }
    if (even.empty() || odd.empty()) {
        throw ConfigError("window needs both even and odd echoes");
    }
    AsymmetryMetric m;
    m.n_even = static_cast<int>(even.size());
    m.n_odd = static_cast<int>(odd.size());

    auto average = [](const auto& values, const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (auto k : idx) s += values(k);
        return s / static_cast<double>(idx.size());
    };
    m.even_mean = average([&](std::size_t k) { return series.mean[k]; }, even);
    m.odd_mean = average([&](std::size_t k) { return series.mean[k]; }, odd);
    if (!(std::abs(m.odd_mean) > floor)) {
        throw DomainError("odd-echo mean is below the floor; ratio undefined");
    }
    m.ratio = m.even_mean / m.odd_mean;

    const Eigen::Index n = series.samples.rows();
    if (n > 1) {
        Eigen::VectorXd e(n);
        Eigen::VectorXd o(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            auto row = [&](std::size_t k) { return series.samples(r, static_cast<Eigen::Index>(k)); };
            e(r) = average(row, even);
            o(r) = average(row, odd);
        }
        const double em = e.mean();
        const double om = o.mean();
        const double nm1 = static_cast<double>(n - 1);
        const double var_e = (e.array() - em).square().sum() / nm1;
        const double var_o = (o.array() - om).square().sum() / nm1;
        const double cov = ((e.array() - em) * (o.array() - om)).sum() / nm1;
        const double var_ratio =
            (var_e / (om * om) + em * em * var_o / std::pow(om, 4) - 2.0 * em * cov / std::pow(om, 3)) /
            static_cast<double>(n);
        m.ratio_std_error = std::sqrt(std::max(var_ratio, 0.0));
    }
    return m;
}

}  // namespace spinecho
