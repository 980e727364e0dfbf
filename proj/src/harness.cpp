#include "effsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "effsim/dense.hpp"
#include "effsim/floquet.hpp"
#include "effsim/gaussian.hpp"
#include "effsim/schrieffer_wolff.hpp"

namespace effsim {

namespace {

constexpr double kValidateDiscreteP = 0.05;
constexpr double kValidateContinuousRate = 0.01;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct RawValue {
    std::string text;
    int line = 0;
};

// key -> (raw text, line), plus the insertion order for stable diagnostics.
struct RawConfig {
    std::string origin;
    std::map<std::string, RawValue> values;
    std::vector<std::string> order;

    [[noreturn]] void fail_key(const std::string& key, const std::string& message) const {
        const auto it = values.find(key);
        std::ostringstream out;
        out << origin;
        if (it != values.end()) out << " line " << it->second.line;
        out << ": " << message;
        throw std::invalid_argument(out.str());
    }
};

RawConfig tokenize_config(const std::string& text, const std::string& origin) {
    RawConfig raw;
    raw.origin = origin;
    std::istringstream stream(text);
    std::string line;
    int number = 0;
    while (std::getline(stream, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + " line " + std::to_string(number) +
                                        ": expected key = value, got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(origin + " line " + std::to_string(number) +
                                        ": missing key before '='");
        if (raw.values.count(key))
            throw std::invalid_argument(origin + " line " + std::to_string(number) +
                                        ": repeated key '" + key + "'");
        raw.values[key] = {value, number};
        raw.order.push_back(key);
    }
    return raw;
}

class ConfigReader {
  public:
    explicit ConfigReader(RawConfig raw) : raw_(std::move(raw)) {}

    bool has(const std::string& key) const { return raw_.values.count(key) > 0; }

    void mark_allowed(const std::string& key) { allowed_.push_back(key); }

    std::string require_text(const std::string& key) {
        if (!has(key))
            throw std::invalid_argument(raw_.origin + ": missing required key '" + key + "'");
        return text(key);
    }

    std::string text(const std::string& key) {
        mark_allowed(key);
        return raw_.values.at(key).text;
    }

    template <typename T, typename Parse>
    T typed(const std::string& key, T fallback, Parse parse, const std::string& expected) {
        mark_allowed(key);
        if (!has(key)) return fallback;
        return parse_or_fail<T>(key, raw_.values.at(key).text, parse, expected);
    }

    template <typename T, typename Parse>
    std::vector<T> typed_list(const std::string& key, std::vector<T> fallback, Parse parse,
                              const std::string& expected) {
        mark_allowed(key);
        if (!has(key)) return fallback;
        std::vector<T> out;
        std::istringstream stream(raw_.values.at(key).text);
        std::string token;
        while (std::getline(stream, token, ','))
            out.push_back(parse_or_fail<T>(key, trim(token), parse, expected));
        if (out.empty()) fail(key, "list for key '" + key + "' is empty");
        return out;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        raw_.fail_key(key, message);
    }

    void finish() const {
        for (const std::string& key : raw_.order)
            if (std::find(allowed_.begin(), allowed_.end(), key) == allowed_.end())
                raw_.fail_key(key, "unknown key '" + key + "'");
    }

  private:
    template <typename T, typename Parse>
    T parse_or_fail(const std::string& key, const std::string& token, Parse parse,
                    const std::string& expected) {
        try {
            std::size_t used = 0;
            T value = parse(token, &used);
            if (token.empty() || used != token.size()) throw std::invalid_argument("trailing");
            return value;
        } catch (const std::exception&) {
            fail(key, "value for key '" + key + "' is not " + expected + ": '" + token + "'");
        }
    }

    RawConfig raw_;
    std::vector<std::string> allowed_;
};

int parse_int_token(const std::string& s, std::size_t* used) { return std::stoi(s, used); }
double parse_double_token(const std::string& s, std::size_t* used) { return std::stod(s, used); }
std::uint64_t parse_u64_token(const std::string& s, std::size_t* used) {
    return std::stoull(s, used);
}
bool parse_bool_token(const std::string& s, std::size_t* used) {
    if (s == "true") {
        *used = s.size();
        return true;
    }
    if (s == "false") {
        *used = s.size();
        return false;
    }
    throw std::invalid_argument("not a bool");
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.11e", value);
    return buffer;
}

double mean_occupation_dense(const DenseState& state) {
    return expectation(state, jw_number_total(state.n)) / state.n;
}

struct Job {
    SweepRow row;
    std::function<void(SweepRow&)> compute;
};

std::string describe(const SweepRow& row) {
    std::ostringstream out;
    out << row.experiment << " grid point N=" << row.N;
    if (!row.mode.empty()) out << " mode=" << row.mode;
    if (row.control > 0) out << " control=" << row.control;
    out << " p=" << row.p << " noise=" << row.noise;
    return out.str();
}

int resolve_threads(int configured, std::size_t points) {
    int n = configured;
    if (n <= 0) {
        if (const char* env = std::getenv("EFFSIM_THREADS")) {
            try {
                std::size_t used = 0;
                const int parsed = std::stoi(env, &used);
                if (used == std::string(env).size() && parsed > 0) n = parsed;
            } catch (const std::exception&) {
            }
        }
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(points, 1)));
}

std::vector<SweepRow> execute(std::vector<Job> jobs, int configured_threads) {
    const int workers = resolve_threads(configured_threads, jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto work = [&]() {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            const auto start = std::chrono::steady_clock::now();
            try {
                jobs[i].compute(jobs[i].row);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::make_exception_ptr(
                        std::runtime_error(describe(jobs[i].row) + ": " + e.what()));
                failed.store(true);
                break;
            }
            jobs[i].row.wall_time_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          start)
                    .count();
        }
    };

    std::vector<std::thread> pool;
    for (int i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (auto& thread : pool) thread.join();
    if (first_error) std::rethrow_exception(first_error);

    std::vector<SweepRow> rows;
    rows.reserve(jobs.size());
    for (auto& job : jobs) rows.push_back(std::move(job.row));
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.experiment, a.N, a.control, a.p, a.noise, a.mode) <
               std::tie(b.experiment, b.N, b.control, b.p, b.noise, b.mode);
    });
    return rows;
}

std::vector<Job> validate_jobs(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (int N : cfg.sizes) {
        for (const std::string& mode : {"exact", "discrete", "continuous"}) {
            Job job;
            job.row.experiment = to_string(cfg.kind);
            job.row.mode = mode;
            job.row.N = N;
            job.row.noise = mode == std::string("discrete")     ? kValidateDiscreteP
                            : mode == std::string("continuous") ? kValidateContinuousRate
                                                                : 0.0;
            job.row.t_sim = cfg.tau;
            job.compute = [cfg, N, mode](SweepRow& row) {
                const auto H = build_quadratic(N, QuadSpec::combo(cfg.h, cfg.g));
                const auto H_dense = jordan_wigner_dense(H);
                const auto all = DepolSpec::all_modes(N);
                double covariance = 0.0;
                double dense = 0.0;
                if (mode == std::string("exact")) {
                    covariance =
                        mean_occupation(evolve_exact(vacuum_state(N), H, cfg.tau));
                    dense = mean_occupation_dense(evolve_lindblad_dense(
                        vacuum_dense(N), {{H_dense, nullptr}}, {}, 0.0, 0.0, cfg.tau,
                        cfg.tol));
                } else if (mode == std::string("discrete")) {
                    auto state = evolve_exact(vacuum_state(N), H, cfg.tau / 2);
                    state = depolarize_modes(
                        state, DepolSpec::probability(all, kValidateDiscreteP));
                    covariance = mean_occupation(evolve_exact(state, H, cfg.tau / 2));

                    auto rho = evolve_lindblad_dense(vacuum_dense(N), {{H_dense, nullptr}},
                                                     {}, 0.0, 0.0, cfg.tau / 2, cfg.tol);
                    for (int i = 0; i < N; ++i)
                        rho = depolarize_mode_dense(rho, i, kValidateDiscreteP);
                    dense = mean_occupation_dense(evolve_lindblad_dense(
                        rho, {{H_dense, nullptr}}, {}, 0.0, 0.0, cfg.tau / 2, cfg.tol));
                } else {
                    covariance = mean_occupation(evolve_noisy_ode(
                        vacuum_state(N), {{H, [](double) { return 1.0; }}},
                        DepolSpec::rate(all, kValidateContinuousRate), 0.0, cfg.tau,
                        cfg.tol));
                    dense = mean_occupation_dense(evolve_lindblad_dense(
                        vacuum_dense(N), {{H_dense, nullptr}}, all,
                        kValidateContinuousRate, 0.0, cfg.tau, cfg.tol));
                }
                row.observable_sim = covariance;
                row.observable_target = dense;
                row.abs_error = std::abs(row.observable_sim - row.observable_target);
            };
            jobs.push_back(std::move(job));
        }
    }
    return jobs;
}

std::vector<Job> trotter_jobs(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (int N : cfg.sizes) {
        for (int T : cfg.steps) {
            for (double noise : cfg.noises) {
                Job job;
                job.row.experiment = to_string(cfg.kind);
                job.row.N = N;
                job.row.control = static_cast<double>(T);
                job.row.p = cfg.p;
                job.row.noise = noise;
                job.row.t_sim = static_cast<double>(T);
                job.compute = [cfg, N, T, noise](SweepRow& row) {
                    const auto bonds =
                        chain_bond_hamiltonians(N, cfg.h, cfg.g, cfg.periodic);
                    const auto split = even_odd_split(bonds, 1);
                    const auto formula = suzuki_formula(cfg.p, split.K);
                    const auto initial = vacuum_state(N);
                    row.observable_target = mean_occupation(
                        evolve_exact(initial, total_hamiltonian(bonds), cfg.tau));
                    const std::optional<DepolSpec> spec =
                        noise > 0 ? std::optional<DepolSpec>(DepolSpec::probability(
                                        DepolSpec::all_modes(N), noise))
                                  : std::nullopt;
                    row.observable_sim =
                        run_trotter(initial, split, formula, cfg.tau, T, spec,
                                    cfg.placement)
                            .observable;
                    row.abs_error = std::abs(row.observable_sim - row.observable_target);
                };
                jobs.push_back(std::move(job));
            }
        }
    }
    return jobs;
}

std::vector<Job> floquet_jobs(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (int N : cfg.sizes) {
        for (double window : cfg.windows) {
            for (double noise : cfg.noises) {
                Job job;
                job.row.experiment = to_string(cfg.kind);
                job.row.N = N;
                job.row.control = window;
                job.row.p = cfg.p;
                job.row.noise = noise;
                job.compute = [cfg, N, window, noise](SweepRow& row) {
                    const FloquetRun run =
                        run_floquet(N, cfg.h0, cfg.h1, cfg.g0, cfg.g1, cfg.p, cfg.tau,
                                    window, noise, cfg.tol, cfg.periodic);
                    row.observable_sim = run.observable_sim;
                    row.observable_target = run.observable_target;
                    row.abs_error = std::abs(row.observable_sim - row.observable_target);
                    row.t_sim = run.t_sim;
                };
                jobs.push_back(std::move(job));
            }
        }
    }
    return jobs;
}

std::vector<Job> sw_jobs(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (int N : cfg.sizes) {
        for (double window : cfg.windows) {
            for (double noise : cfg.noises) {
                Job job;
                job.row.experiment = to_string(cfg.kind);
                job.row.N = N;
                job.row.control = window;
                job.row.p = cfg.p;
                job.row.noise = noise;
                job.compute = [cfg, N, window, noise](SweepRow& row) {
                    const SWDemo demo = sw_demo(N, cfg.p);
                    const SWRun run =
                        run_sw(demo.M, demo.P, demo.H0, cfg.p, demo.initial, demo.O,
                               cfg.tau, window, noise, cfg.tol);
                    row.observable_sim = run.observable_sim;
                    row.observable_target = run.observable_target;
                    row.abs_error = std::abs(row.observable_sim - row.observable_target);
                    row.t_sim = run.t_sim;
                };
                jobs.push_back(std::move(job));
            }
        }
    }
    return jobs;
}

void require_positive_grid(const ConfigReader&, const std::vector<double>& values,
                           const std::string& key, ConfigReader& reader) {
    for (double v : values)
        if (v <= 0) reader.fail(key, "entries of '" + key + "' must be positive");
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    out.push_back(current);
    return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Validate: return "validate";
        case ExperimentKind::TrotterSweep: return "trotter-sweep";
        case ExperimentKind::FloquetSweep: return "floquet-sweep";
        case ExperimentKind::SwSweep: return "sw-sweep";
        case ExperimentKind::Bounds: return "bounds";
        case ExperimentKind::FtOverhead: return "ft-overhead";
    }
    throw std::logic_error("unknown experiment kind");
}

ExperimentKind experiment_kind_from(const std::string& name) {
    if (name == "validate") return ExperimentKind::Validate;
    if (name == "trotter-sweep") return ExperimentKind::TrotterSweep;
    if (name == "floquet-sweep") return ExperimentKind::FloquetSweep;
    if (name == "sw-sweep") return ExperimentKind::SwSweep;
    if (name == "bounds") return ExperimentKind::Bounds;
    if (name == "ft-overhead") return ExperimentKind::FtOverhead;
    throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ConfigReader reader(tokenize_config(text, origin));
    ExperimentConfig cfg;

    cfg.kind = experiment_kind_from(reader.require_text("kind"));

    cfg.tol = reader.typed("tol", cfg.tol, parse_double_token, "a number");
    if (cfg.tol <= 0) reader.fail("tol", "'tol' must be positive");
    cfg.seed = reader.typed("seed", cfg.seed, parse_u64_token, "an unsigned integer");
    cfg.threads = reader.typed("threads", cfg.threads, parse_int_token, "an integer");
    if (cfg.threads < 0) reader.fail("threads", "'threads' must be non-negative");
    if (reader.has("out")) cfg.out = reader.text("out");
    cfg.tau = reader.typed("tau", cfg.tau, parse_double_token, "a number");
    if (cfg.tau <= 0) reader.fail("tau", "'tau' must be positive");

    const bool sweep = cfg.kind == ExperimentKind::Validate ||
                       cfg.kind == ExperimentKind::TrotterSweep ||
                       cfg.kind == ExperimentKind::FloquetSweep ||
                       cfg.kind == ExperimentKind::SwSweep;

    if (sweep) {
        if (!reader.has("N")) reader.fail("N", "missing required key 'N'");
        cfg.sizes = reader.typed_list<int>("N", {}, parse_int_token, "an integer");
        for (int N : cfg.sizes)
            if (N < 1) reader.fail("N", "entries of 'N' must be at least 1");
    }

    switch (cfg.kind) {
        case ExperimentKind::Validate:
            cfg.h = reader.typed("h", cfg.h, parse_double_token, "a number");
            cfg.g = reader.typed("g", cfg.g, parse_double_token, "a number");
            for (int N : cfg.sizes)
                if (N > 6) reader.fail("N", "validate compares against the dense oracle and needs N <= 6");
            break;
        case ExperimentKind::TrotterSweep: {
            cfg.h = reader.typed("h", cfg.h, parse_double_token, "a number");
            cfg.g = reader.typed("g", cfg.g, parse_double_token, "a number");
            if (!reader.has("T")) reader.fail("T", "missing required key 'T'");
            cfg.steps = reader.typed_list<int>("T", {}, parse_int_token, "an integer");
            for (int T : cfg.steps)
                if (T < 1) reader.fail("T", "entries of 'T' must be at least 1");
            cfg.noises =
                reader.typed_list("noise", cfg.noises, parse_double_token, "a number");
            for (double v : cfg.noises)
                if (v < 0 || v >= 1)
                    reader.fail("noise", "entries of 'noise' must lie in [0, 1)");
            cfg.p = reader.typed("p_order", 2, parse_int_token, "an integer");
            if (cfg.p < 1) reader.fail("p_order", "'p_order' must be at least 1");
            cfg.periodic = reader.typed("periodic", cfg.periodic, parse_bool_token,
                                        "true or false");
            if (cfg.periodic)
                for (int N : cfg.sizes)
                    if (N % 2 != 0)
                        reader.fail("N", "periodic chains need even N for the bond colouring");
            if (reader.has("placement")) {
                const std::string placement = reader.text("placement");
                if (placement == "all-modes")
                    cfg.placement = NoisePlacement::PerLayerAllModes;
                else if (placement == "touched-modes")
                    cfg.placement = NoisePlacement::PerLayerTouchedModes;
                else
                    reader.fail("placement",
                                "'placement' must be all-modes or touched-modes");
            }
            break;
        }
        case ExperimentKind::FloquetSweep: {
            cfg.h0 = reader.typed("h0", cfg.h0, parse_double_token, "a number");
            cfg.h1 = reader.typed("h1", cfg.h1, parse_double_token, "a number");
            cfg.g0 = reader.typed("g0", cfg.g0, parse_double_token, "a number");
            cfg.g1 = reader.typed("g1", cfg.g1, parse_double_token, "a number");
            if (!reader.has("uptau")) reader.fail("uptau", "missing required key 'uptau'");
            cfg.windows = reader.typed_list<double>("uptau", {}, parse_double_token, "a number");
            require_positive_grid(reader, cfg.windows, "uptau", reader);
            cfg.noises =
                reader.typed_list("noise", cfg.noises, parse_double_token, "a number");
            for (double v : cfg.noises)
                if (v < 0) reader.fail("noise", "entries of 'noise' must be non-negative");
            cfg.p = reader.typed("p_order", 0, parse_int_token, "an integer");
            if (cfg.p != 0 && cfg.p != 1)
                reader.fail("p_order", "'p_order' must be 0 or 1 for floquet-sweep");
            if (cfg.p == 1 && (cfg.h0 != 0.0 || cfg.g0 != 0.0))
                reader.fail("p_order", "p_order 1 needs h0 = 0 and g0 = 0");
            cfg.periodic = reader.typed("periodic", cfg.periodic, parse_bool_token,
                                        "true or false");
            break;
        }
        case ExperimentKind::SwSweep: {
            if (!reader.has("uptau")) reader.fail("uptau", "missing required key 'uptau'");
            cfg.windows = reader.typed_list<double>("uptau", {}, parse_double_token, "a number");
            require_positive_grid(reader, cfg.windows, "uptau", reader);
            cfg.noises =
                reader.typed_list("noise", cfg.noises, parse_double_token, "a number");
            for (double v : cfg.noises)
                if (v < 0) reader.fail("noise", "entries of 'noise' must be non-negative");
            cfg.p = reader.typed("p_order", 0, parse_int_token, "an integer");
            if (cfg.p != 0 && cfg.p != 1)
                reader.fail("p_order", "'p_order' must be 0 or 1 for sw-sweep");
            for (int N : cfg.sizes)
                if (N < 4 || N % 2 != 0)
                    reader.fail("N", "sw-sweep needs even N >= 4");
            break;
        }
        case ExperimentKind::Bounds: {
            const std::string mapping = reader.require_text("mapping");
            if (mapping == "trotter")
                cfg.mapping = MappingKind::Trotter;
            else if (mapping == "floquet-magnus")
                cfg.mapping = MappingKind::FloquetMagnus;
            else if (mapping == "schrieffer-wolff")
                cfg.mapping = MappingKind::SchriefferWolff;
            else
                reader.fail("mapping",
                            "'mapping' must be trotter, floquet-magnus, or schrieffer-wolff");
            if (!reader.has("noise")) reader.fail("noise", "missing required key 'noise'");
            cfg.noises = reader.typed_list<double>("noise", {}, parse_double_token, "a number");
            require_positive_grid(reader, cfg.noises, "noise", reader);
            if (!reader.has("p_order")) reader.fail("p_order", "missing required key 'p_order'");
            cfg.p = reader.typed("p_order", 0, parse_int_token, "an integer");
            cfg.d = reader.typed("d", cfg.d, parse_int_token, "an integer");
            if (cfg.d < 1) reader.fail("d", "'d' must be at least 1");
            cfg.constants.c_map =
                reader.typed("c_map", cfg.constants.c_map, parse_double_token, "a number");
            cfg.constants.c_noise = reader.typed("c_noise", cfg.constants.c_noise,
                                                 parse_double_token, "a number");
            break;
        }
        case ExperimentKind::FtOverhead: {
            if (!reader.has("xi0")) reader.fail("xi0", "missing required key 'xi0'");
            if (!reader.has("xi_th")) reader.fail("xi_th", "missing required key 'xi_th'");
            cfg.ft.xi0 = reader.typed("xi0", 0.0, parse_double_token, "a number");
            cfg.ft.xi_th = reader.typed("xi_th", 0.0, parse_double_token, "a number");
            cfg.ft.t = reader.typed("code_t", cfg.ft.t, parse_int_token, "an integer");
            cfg.ft.levels = reader.typed("levels", cfg.ft.levels, parse_int_token,
                                         "an integer");
            cfg.ft.delta = reader.typed("delta", cfg.ft.delta, parse_double_token,
                                        "a number");
            cfg.ft.tau = cfg.tau;
            cfg.ft.d = reader.typed("d", cfg.ft.d, parse_int_token, "an integer");
            cfg.ft.p = reader.typed("p_order", cfg.ft.p, parse_int_token, "an integer");
            cfg.constants.c_map =
                reader.typed("c_map", cfg.constants.c_map, parse_double_token, "a number");
            cfg.constants.c_noise = reader.typed("c_noise", cfg.constants.c_noise,
                                                 parse_double_token, "a number");
            break;
        }
    }

    reader.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

std::vector<SweepRow> run_experiment(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    switch (cfg.kind) {
        case ExperimentKind::Validate: jobs = validate_jobs(cfg); break;
        case ExperimentKind::TrotterSweep: jobs = trotter_jobs(cfg); break;
        case ExperimentKind::FloquetSweep: jobs = floquet_jobs(cfg); break;
        case ExperimentKind::SwSweep: jobs = sw_jobs(cfg); break;
        case ExperimentKind::Bounds:
        case ExperimentKind::FtOverhead:
            throw std::invalid_argument(
                "bounds kinds produce no sweep rows; use run_bounds or run_ft");
    }
    return execute(std::move(jobs), cfg.threads);
}

std::vector<TradeoffResult> run_bounds(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::Bounds)
        throw std::invalid_argument("run_bounds needs a bounds config");
    std::vector<TradeoffResult> rows;
    for (double gamma : cfg.noises) {
        switch (cfg.mapping) {
            case MappingKind::Trotter:
                rows.push_back(trotter_tradeoff(cfg.p, cfg.d, gamma, cfg.tau, cfg.constants));
                break;
            case MappingKind::FloquetMagnus:
                rows.push_back(fm_tradeoff(cfg.p, cfg.d, gamma, cfg.tau, cfg.constants));
                break;
            case MappingKind::SchriefferWolff:
                rows.push_back(sw_tradeoff(cfg.p, cfg.d, gamma, cfg.tau, cfg.constants));
                break;
        }
    }
    return rows;
}

FTOverhead run_ft(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::FtOverhead)
        throw std::invalid_argument("run_ft needs an ft-overhead config");
    return ft_overhead(cfg.ft, cfg.constants);
}

FitResult fit_power_law(const std::vector<SweepRow>& rows, const std::string& x_column,
                        const std::string& y_column,
                        const std::function<bool(const SweepRow&)>& filter) {
    auto column = [](const SweepRow& row, const std::string& name) -> double {
        if (name == "N") return row.N;
        if (name == "T" || name == "uptau" || name == "control") return row.control;
        if (name == "p") return row.p;
        if (name == "noise") return row.noise;
        if (name == "observable_sim") return row.observable_sim;
        if (name == "observable_target") return row.observable_target;
        if (name == "abs_error") return row.abs_error;
        if (name == "t_sim") return row.t_sim;
        throw std::invalid_argument("unknown fit column '" + name + "'");
    };

    std::vector<double> xs, ys;
    for (const SweepRow& row : rows) {
        if (filter && !filter(row)) continue;
        const double x = column(row, x_column);
        const double y = column(row, y_column);
        if (x <= 0 || y <= 0)
            throw std::invalid_argument("power-law fit needs positive data, got (" +
                                        std::to_string(x) + ", " + std::to_string(y) + ")");
        xs.push_back(std::log(x));
        ys.push_back(std::log(y));
    }
    if (xs.size() < 4)
        throw std::invalid_argument("power-law fit needs at least 4 points, got " +
                                    std::to_string(xs.size()));

    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    FitResult fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double predicted = fit.intercept + fit.slope * xs[i];
        ss_res += (ys[i] - predicted) * (ys[i] - predicted);
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    fit.r_squared = ss_tot < 1e-300 ? 1.0 : std::max(0.0, 1.0 - ss_res / ss_tot);
    fit.points = static_cast<int>(xs.size());
    fit.x_name = x_column;
    fit.y_name = y_column;
    return fit;
}

void write_results(const std::vector<SweepRow>& rows, ExperimentKind kind,
                   const std::string& path) {
    std::ostringstream out;
    const bool validate = kind == ExperimentKind::Validate;
    const bool trotter = kind == ExperimentKind::TrotterSweep;
    if (validate)
        out << "experiment,N,mode,noise,observable_sim,observable_target,abs_error,t_sim\n";
    else if (trotter)
        out << "experiment,N,T,p,noise,observable_sim,observable_target,abs_error,t_sim\n";
    else if (kind == ExperimentKind::FloquetSweep || kind == ExperimentKind::SwSweep)
        out << "experiment,N,uptau,p,noise,observable_sim,observable_target,abs_error,t_sim\n";
    else
        throw std::invalid_argument("no sweep schema for kind '" + to_string(kind) + "'");

    for (const SweepRow& row : rows) {
        out << csv_escape(row.experiment) << ',' << row.N << ',';
        if (validate)
            out << csv_escape(row.mode) << ',';
        else if (trotter)
            out << static_cast<long long>(std::llround(row.control)) << ',' << row.p << ',';
        else
            out << format_double(row.control) << ',' << row.p << ',';
        out << format_double(row.noise) << ',' << format_double(row.observable_sim) << ','
            << format_double(row.observable_target) << ',' << format_double(row.abs_error)
            << ',' << format_double(row.t_sim) << '\n';
    }
    write_file(path, out.str());
}

void write_results(const std::vector<TradeoffResult>& rows, const std::string& path) {
    std::ostringstream out;
    out << "experiment,mapping,p,d,tau,noise,control,alpha_exponent,error_bound,t_sim_bound\n";
    for (const TradeoffResult& row : rows) {
        out << "bounds," << to_string(row.mapping) << ',' << row.p << ',' << row.d << ','
            << format_double(row.tau) << ',' << format_double(row.gamma) << ','
            << format_double(row.control) << ',' << format_double(row.alpha_exponent) << ','
            << format_double(row.error_bound) << ',' << format_double(row.t_sim_bound)
            << '\n';
    }
    write_file(path, out.str());
}

void write_results(const FTOverhead& row, const FTParams& params, const std::string& path) {
    std::ostringstream out;
    out << "experiment,xi0,xi_th,code_t,levels,delta,xi_l,optimal_t,total_error,required_l\n";
    out << "ft-overhead," << format_double(params.xi0) << ',' << format_double(params.xi_th)
        << ',' << params.t << ',' << params.levels << ',' << format_double(params.delta)
        << ',' << format_double(row.xi_l) << ',' << format_double(row.optimal_t) << ','
        << format_double(row.total_error) << ',' << row.required_l << '\n';
    write_file(path, out.str());
}

void write_results(const FitResult& fit, const std::string& path) {
    std::ostringstream out;
    out << "x_column,y_column,slope,intercept,r_squared,points\n";
    out << csv_escape(fit.x_name) << ',' << csv_escape(fit.y_name) << ','
        << format_double(fit.slope) << ',' << format_double(fit.intercept) << ','
        << format_double(fit.r_squared) << ',' << fit.points << '\n';
    write_file(path, out.str());
}

std::vector<SweepRow> read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read results file '" + path + "'");
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("results file '" + path + "' is empty");

    enum class Schema { Validate, Trotter, Window };
    Schema schema;
    if (header == "experiment,N,mode,noise,observable_sim,observable_target,abs_error,t_sim")
        schema = Schema::Validate;
    else if (header == "experiment,N,T,p,noise,observable_sim,observable_target,abs_error,t_sim")
        schema = Schema::Trotter;
    else if (header ==
             "experiment,N,uptau,p,noise,observable_sim,observable_target,abs_error,t_sim")
        schema = Schema::Window;
    else
        throw std::runtime_error("unrecognized results header in '" + path + "'");

    std::vector<SweepRow> rows;
    std::string line;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::size_t expected = schema == Schema::Validate ? 8 : 9;
        if (fields.size() != expected)
            throw std::runtime_error("results file '" + path + "' line " +
                                     std::to_string(number) + ": expected " +
                                     std::to_string(expected) + " fields");
        try {
            SweepRow row;
            row.experiment = fields[0];
            row.N = std::stoi(fields[1]);
            std::size_t next = 2;
            if (schema == Schema::Validate) {
                row.mode = fields[next++];
            } else {
                row.control = std::stod(fields[next++]);
                row.p = std::stoi(fields[next++]);
            }
            row.noise = std::stod(fields[next++]);
            row.observable_sim = std::stod(fields[next++]);
            row.observable_target = std::stod(fields[next++]);
            row.abs_error = std::stod(fields[next++]);
            row.t_sim = std::stod(fields[next++]);
            rows.push_back(std::move(row));
        } catch (const std::exception&) {
            throw std::runtime_error("results file '" + path + "' line " +
                                     std::to_string(number) + ": malformed field");
        }
    }
    return rows;
}

FitConfig parse_fit_config(const std::string& text, const std::string& origin) {
    ConfigReader reader(tokenize_config(text, origin));
    FitConfig cfg;
    cfg.input = reader.require_text("input");
    cfg.x_column = reader.require_text("x_column");
    cfg.y_column = reader.require_text("y_column");
    if (reader.has("filter_experiment")) cfg.filter_experiment = reader.text("filter_experiment");
    if (reader.has("filter_N"))
        cfg.filter_N = reader.typed("filter_N", 0, parse_int_token, "an integer");
    if (reader.has("filter_p"))
        cfg.filter_p = reader.typed("filter_p", 0, parse_int_token, "an integer");
    if (reader.has("filter_noise"))
        cfg.filter_noise = reader.typed("filter_noise", 0.0, parse_double_token, "a number");
    if (reader.has("out")) cfg.out = reader.text("out");
    reader.finish();
    return cfg;
}

FitConfig load_fit_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_fit_config(buffer.str(), path);
}

FitResult run_fit(const FitConfig& cfg, const std::vector<SweepRow>& rows) {
    auto matches = [&cfg](const SweepRow& row) {
        if (cfg.filter_experiment && row.experiment != *cfg.filter_experiment) return false;
        if (cfg.filter_N && row.N != *cfg.filter_N) return false;
        if (cfg.filter_p && row.p != *cfg.filter_p) return false;
        if (cfg.filter_noise) {
            const double want = *cfg.filter_noise;
            if (std::abs(row.noise - want) > 1e-9 * (1.0 + std::abs(want))) return false;
        }
        return true;
    };
    return fit_power_law(rows, cfg.x_column, cfg.y_column, matches);
}

}  // namespace effsim
