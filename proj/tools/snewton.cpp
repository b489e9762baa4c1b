// snewton: solve, scan and check bound states of the Schrodinger-Newton
// system from the command line.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <snewton/snewton.hpp>

namespace fs = std::filesystem;
using namespace snewton;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_failed = 2;
constexpr int exit_scan_failed = 3;

/// Error raised inside one stage of a command; carries the stage name.
struct StageError
{
    std::string stage;
    Error error;
};

template <class F>
auto stage(const std::string& name, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        throw StageError{name, e};
    }
}

struct ProblemFlags
{
    int dim = 0;
    double m = 0.0;
    std::optional<int> parity;

    ProblemParams params() const { return make_params(dim, parity ? double(*parity) : m); }
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& f)
{
    cmd->add_option("--dim", f.dim, "dimension (1 or 2)")->required()->check(CLI::IsMember({1, 2}));
    auto* m = cmd->add_option("--m", f.m, "angular momentum m >= 0 (2D); parity in 1D");
    auto* p = cmd->add_option("--parity", f.parity, "parity 0 (even) or 1 (odd), 1D only")->check(CLI::IsMember({0, 1}));
    m->excludes(p);
}

struct ControlFlags
{
    std::optional<double> tol;
    std::optional<double> r_max;

    IntegrationControls controls() const
    {
        IntegrationControls c;
        if (tol) {
            require(*tol > 0.0 && *tol < 1e-2, ErrorKind::InvalidArgument, "--tol must lie in (0, 1e-2)");
            c.rel_tol = *tol;
            c.abs_tol = 1e-2 * *tol;
        }
        c.r_max = r_max;
        return c;
    }
};

void add_control_flags(CLI::App* cmd, ControlFlags& f)
{
    cmd->add_option("--tol", f.tol, "relative integrator tolerance (absolute tolerance is 1e-2 of it)");
    cmd->add_option("--rmax", f.r_max, "absolute integration horizon (default: V=1 radius plus a tail)");
}

Json controls_json(const IntegrationControls& c)
{
    return Json{{"rel_tol", c.rel_tol},
                {"abs_tol", c.abs_tol},
                {"r_max", c.r_max ? Json(*c.r_max) : Json(nullptr)},
                {"tail_horizon", c.tail_horizon},
                {"escape_factor", c.escape_factor},
                {"max_step", c.max_step},
                {"max_steps", c.max_steps}};
}

/// Knobs of the bound-state profile and the checks (library defaults).
Json solver_json(const ProblemParams& p, const IntegrationControls& c)
{
    const ProfileOptions po;
    const CheckOptions co;
    return Json{{"eps_origin", c.origin_offset(p)},
                {"profile_max_step", po.max_step},
                {"profile_agreement", po.agreement},
                {"tail",
                 {{"step", po.tail.step},
                  {"sample_every", po.tail.sample_every},
                  {"initial_length", po.tail.initial_length},
                  {"max_length", po.tail.max_length},
                  {"sweeps", po.tail.sweeps},
                  {"u_floor", po.tail.u_floor},
                  {"z_window", po.tail.z_window},
                  {"settle_efolds", po.tail.settle_efolds},
                  {"log_floor", po.tail.log_floor}}},
                {"check_rel_tol", co.rel_tol},
                {"check_abs_tol", co.abs_tol}};
}

std::string canonical(const Json& j) { return j.dump(); }

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    require(bool(os), ErrorKind::InvalidArgument, "cannot write " + path.string());
    os << text;
    require(bool(os), ErrorKind::InvalidArgument, "write failed for " + path.string());
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string command_line(int argc, char** argv)
{
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

Json assessment_json(const ProfileAssessment& a)
{
    Json j;
    j["checks"] = to_json(a.report);
    if (!a.decay_applicable) {
        j["decay"] = "not_applicable";
    } else if (a.decay) {
        j["decay"] = to_json(*a.decay);
    } else {
        j["decay"] = Json{{"pass", false}, {"error", a.decay_error}};
    }
    j["all_pass"] = a.passed();
    Json failed = Json::array();
    for (const auto& n : a.report.failed_names()) failed.push_back(n);
    if (a.decay_applicable && !(a.decay && a.decay->decaying())) failed.push_back("decay");
    j["failed"] = failed;
    return j;
}

// ---------------------------------------------------------------- solve

struct SolveFlags
{
    ProblemFlags problem;
    ControlFlags control;
    int nodes = 0;
    std::optional<double> bis_tol;
    std::optional<double> gamma;
    std::optional<double> sigma;
    double omega_rot = 0.0;
    std::string out;
};

int run_solve(const SolveFlags& f, const std::string& cmdline)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ProblemParams p = f.problem.params();
    const IntegrationControls c = f.control.controls();
    require(f.nodes >= 0, ErrorKind::InvalidArgument, "--nodes must be nonnegative");
    require(f.gamma.has_value() == f.sigma.has_value(), ErrorKind::InvalidArgument,
            "--gamma and --sigma must be given together");
    require(!f.bis_tol || *f.bis_tol > 0.0, ErrorKind::InvalidArgument, "--bis-tol must be positive");
    require(p.dim() == 2 || f.omega_rot == 0.0, ErrorKind::InvalidArgument, "--omega-rot applies to 2D only");

    Json params{{"dim", p.dim()}, {"m", p.m()}, {"nodes", f.nodes}};
    Json physical_params = nullptr;
    if (f.gamma) {
        physical_params = Json{{"gamma", *f.gamma}, {"sigma", *f.sigma}, {"omega_rot", f.omega_rot}};
    }
    const double bis_rel = f.bis_tol.value_or(1e-12);
    Json controls = controls_json(c);
    controls["solver"] = solver_json(p, c);
    const std::string id = run_id(canonical(Json{{"command", "solve"},
                                                 {"params", params},
                                                 {"controls", controls},
                                                 {"bis_tol_rel", bis_rel},
                                                 {"physical", physical_params},
                                                 {"version", version}}));

    const Bracket br = stage("bracket", [&] { return bracket_alpha(f.nodes, p, c); });
    const BoundState bs = stage("refine", [&] { return refine_alpha(br, f.nodes, p, c, bis_rel * br.hi); });
    const ProfileAssessment assessment = stage("diagnostics", [&] { return assess_profile(bs.profile); });

    std::optional<PhysicalSolution> phys;
    std::optional<ResidualReport> res;
    if (f.gamma) {
        phys = stage("physical", [&] { return to_physical(bs.profile, *f.gamma, *f.sigma, f.omega_rot); });
        res = residual(*phys);
    }

    const fs::path dir(f.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorKind::InvalidArgument, "cannot create output directory " + dir.string());

    std::vector<std::string> files{"profile.csv", "diagnostics.json", "manifest.json"};
    {
        std::ostringstream os;
        write_profile_csv(os, bs.profile, id);
        write_text(dir / "profile.csv", os.str());
    }
    Json diag{{"run_id", id}};
    diag.update(assessment_json(assessment));
    write_text(dir / "diagnostics.json", diag.dump(2) + "\n");
    if (phys) {
        std::ostringstream os;
        write_physical_csv(os, *phys, id);
        write_text(dir / "physical.csv", os.str());
        files.push_back("physical.csv");
    }

    const auto& prof = bs.profile;
    Json result{{"alpha", bs.alpha},
                {"bracket", {bs.bracket.lo, bs.bracket.hi}},
                {"bracket_nodes", {bs.bracket.at_lo.nodes, bs.bracket.at_hi.nodes}},
                {"zeros", prof.zeros},
                {"samples", prof.size()},
                {"r_end", prof.r_end},
                {"termination", std::string(to_string(prof.termination))},
                {"tail_start_r", prof.has_tail() ? Json(prof.samples[prof.tail_start].r) : Json(nullptr)},
                {"diagnostics_pass", assessment.passed()}};
    Json manifest{{"run_id", id},
                  {"command", "solve"},
                  {"command_line", cmdline},
                  {"version", version},
                  {"params", params},
                  {"controls", controls},
                  {"bis_tol_rel", bis_rel},
                  {"result", result}};
    if (phys) {
        manifest["physical"] = Json{{"gamma", phys->gamma},
                                    {"sigma", phys->sigma},
                                    {"omega_rot", phys->Omega},
                                    {"omega", phys->omega},
                                    {"v_origin", phys->v_origin},
                                    {"E", phys->energy},
                                    {"N", phys->charge},
                                    {"residual_phi", res->phi_equation},
                                    {"residual_v", res->v_equation}};
    }
    manifest["files"] = files;
    manifest["wall_time_s"] = seconds_since(t0);
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "alpha=" << format_double(bs.alpha) << " zeros=" << prof.zeros.size()
              << " diagnostics=" << (assessment.passed() ? "pass" : "FAIL") << " run_id=" << id << "\n";
    if (!assessment.passed()) {
        std::cerr << "warning: diagnostics failed:";
        for (const auto& n : diag["failed"]) std::cerr << ' ' << n.get<std::string>();
        std::cerr << "\n";
    }
    return exit_ok;
}

// ---------------------------------------------------------------- scan

struct ScanFlags
{
    int dim = 2;
    double m_min = 0.0;
    double m_max = 0.0;
    double m_step = 0.0;
    int nodes_max = 0;
    int jobs = 1;
    ControlFlags control;
    std::string out;
};

struct ScanRow
{
    double m = 0.0;
    int n = 0;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::string status;
    std::string message;
};

std::vector<ScanRow> scan_one_m(double m, int dim, int nodes_max, const IntegrationControls& c)
{
    std::vector<ScanRow> rows;
    const ProblemParams p = make_params(dim, m);
    double seed = 1.0;
    for (int n = 0; n <= nodes_max; ++n) {
        ScanRow row;
        row.m = m;
        row.n = n;
        try {
            const BoundState bs = solve_bound_state(n, p, c, std::nullopt, seed);
            row.alpha = bs.alpha;
            row.status = "ok";
            seed = bs.bracket.lo;
        } catch (const Error& e) {
            row.status = "failed:" + std::string(to_string(e.kind()));
            row.message = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

int run_scan(const ScanFlags& f, const std::string& cmdline)
{
    const auto t0 = std::chrono::steady_clock::now();
    require(f.m_step > 0.0 && std::isfinite(f.m_step), ErrorKind::InvalidArgument, "--m-step must be positive");
    require(f.m_max >= f.m_min, ErrorKind::InvalidArgument, "--m-max must not be below --m-min");
    require(f.nodes_max >= 0, ErrorKind::InvalidArgument, "--nodes-max must be nonnegative");
    require(f.jobs >= 1, ErrorKind::InvalidArgument, "--jobs must be at least 1");
    const IntegrationControls c = f.control.controls();

    std::vector<double> grid;
    const auto count = static_cast<long>(std::floor((f.m_max - f.m_min) / f.m_step + 1e-9));
    for (long k = 0; k <= count; ++k) grid.push_back(f.m_min + static_cast<double>(k) * f.m_step);
    for (double m : grid) make_params(f.dim, m); // validate the whole grid up front

    Json controls = controls_json(c);
    controls["solver"] = solver_json(make_params(f.dim, grid.front()), c);
    controls["solver"].erase("eps_origin"); // depends on m: 1e-4 max(1, sqrt(2(2m+d)))
    controls["bis_tol_rel"] = 1e-12;
    const Json params{{"dim", f.dim},
                      {"m_min", f.m_min},
                      {"m_max", f.m_max},
                      {"m_step", f.m_step},
                      {"nodes_max", f.nodes_max}};
    const std::string id =
        run_id(canonical(Json{{"command", "scan"}, {"params", params}, {"controls", controls}, {"version", version}}));

    std::vector<std::vector<ScanRow>> results(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            results[i] = scan_one_m(grid[i], f.dim, f.nodes_max, c);
        }
    };
    const int workers = std::min<int>(f.jobs, static_cast<int>(grid.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    const fs::path dir(f.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorKind::InvalidArgument, "cannot create output directory " + dir.string());

    std::ostringstream csv;
    csv << "# run_id=" << id << "\n";
    csv << "m,n,alpha,status\n";
    std::size_t ok = 0, total = 0;
    Json outcomes = Json::array();
    for (const auto& rows : results) {
        for (const auto& r : rows) {
            csv << format_double(r.m) << ',' << r.n << ',' << format_double(r.alpha) << ',' << r.status << '\n';
            ++total;
            if (r.status == "ok") ++ok;
            Json o{{"m", r.m}, {"n", r.n}, {"status", r.status}};
            if (!r.message.empty()) o["message"] = r.message;
            outcomes.push_back(o);
        }
    }
    write_text(dir / "scan.csv", csv.str());
    const double fraction = total ? double(ok) / double(total) : 0.0;
    Json manifest{{"run_id", id},
                  {"command", "scan"},
                  {"command_line", cmdline},
                  {"version", version},
                  {"params", params},
                  {"controls", controls},
                  {"jobs", f.jobs},
                  {"rows", total},
                  {"ok", ok},
                  {"outcomes", outcomes},
                  {"files", {"scan.csv", "manifest.json"}},
                  {"wall_time_s", seconds_since(t0)}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << ok << "/" << total << " bound states found, run_id=" << id << "\n";
    return fraction >= 0.9 ? exit_ok : exit_scan_failed;
}

// ---------------------------------------------------------------- check

struct CheckFlags
{
    ProblemFlags problem;
    ControlFlags control;
    std::optional<double> u0;
    std::optional<std::string> profile;
};

int run_check(const CheckFlags& f)
{
    const ProblemParams p = f.problem.params();
    Profile prof;
    Json source;
    if (f.u0) {
        require(*f.u0 > 0.0, ErrorKind::InvalidArgument, "--u0 must be positive");
        prof = stage("integrate", [&] { return integrate(*f.u0, p, f.control.controls()).profile; });
        source = Json{{"u0", *f.u0}};
    } else {
        std::ifstream is(*f.profile);
        require(bool(is), ErrorKind::InvalidArgument, "cannot open " + *f.profile);
        try {
            prof = read_profile_csv(is, p);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ParseError) throw Error(ErrorKind::ParseError, *f.profile + ": " + e.detail());
            throw;
        }
        source = Json{{"profile", *f.profile}, {"u0", prof.u0}};
    }
    const ProfileAssessment a = assess_profile(prof);
    Json out{{"dim", p.dim()},
             {"m", p.m()},
             {"source", source},
             {"samples", prof.size()},
             {"zeros", prof.zeros.size()},
             {"termination", std::string(to_string(prof.termination))}};
    out.update(assessment_json(a));
    std::cout << out.dump(2) << "\n";
    if (!a.passed()) {
        std::cerr << "failed checks:";
        for (const auto& n : out["failed"]) std::cerr << ' ' << n.get<std::string>();
        std::cerr << "\n";
        return exit_failed;
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bound states of the Schrodinger-Newton system in one and two dimensions"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    SolveFlags solve;
    auto* cmd_solve = app.add_subcommand("solve", "compute the bound state with a given number of zeros");
    add_problem_flags(cmd_solve, solve.problem);
    add_control_flags(cmd_solve, solve.control);
    cmd_solve->add_option("--nodes", solve.nodes, "number of zeros n")->required();
    cmd_solve->add_option("--bis-tol", solve.bis_tol, "bisection tolerance relative to alpha (default 1e-12)");
    cmd_solve->add_option("--gamma", solve.gamma, "coupling constant (with --sigma: write physical variables)");
    cmd_solve->add_option("--sigma", solve.sigma, "length scale sigma");
    cmd_solve->add_option("--omega-rot", solve.omega_rot, "rotation rate Omega (2D)");
    cmd_solve->add_option("--out", solve.out, "output directory")->required();

    ScanFlags scan;
    auto* cmd_scan = app.add_subcommand("scan", "alpha_{m,n} over a grid of m and n = 0..nodes-max");
    cmd_scan->add_option("--dim", scan.dim, "dimension (default 2)")->check(CLI::IsMember({1, 2}));
    cmd_scan->add_option("--m-min", scan.m_min, "smallest m")->required();
    cmd_scan->add_option("--m-max", scan.m_max, "largest m")->required();
    cmd_scan->add_option("--m-step", scan.m_step, "grid step in m")->required();
    cmd_scan->add_option("--nodes-max", scan.nodes_max, "largest node count")->required();
    cmd_scan->add_option("--jobs", scan.jobs, "worker threads (default 1)");
    add_control_flags(cmd_scan, scan.control);
    cmd_scan->add_option("--out", scan.out, "output directory")->required();

    CheckFlags check;
    auto* cmd_check = app.add_subcommand("check", "run the structural checks on a trajectory or stored profile");
    add_problem_flags(cmd_check, check.problem);
    add_control_flags(cmd_check, check.control);
    auto* u0 = cmd_check->add_option("--u0", check.u0, "integrate from this u(0)");
    auto* prof = cmd_check->add_option("--profile", check.profile, "profile CSV written by solve");
    u0->excludes(prof);
    prof->excludes(u0);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }
    if (cmd_check->parsed() && !check.u0 && !check.profile) {
        std::cerr << "check: one of --u0 or --profile is required\n";
        return exit_usage;
    }

    const std::string cmdline = command_line(argc, argv);
    try {
        if (cmd_solve->parsed()) return run_solve(solve, cmdline);
        if (cmd_scan->parsed()) return run_scan(scan, cmdline);
        return run_check(check);
    } catch (const StageError& e) {
        std::cerr << "error in stage " << e.stage << ": " << e.error.what() << "\n";
        return e.error.kind() == ErrorKind::InvalidArgument ? exit_usage : exit_failed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::ParseError ? exit_usage : exit_failed;
    }
}
