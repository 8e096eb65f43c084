// cpreg: change point localization in high-dimensional linear regression.
//
//   cpreg detect    --input data.csv --response y --method dp-lr --cv --stride 5 --output report.json
//   cpreg tune      --input data.csv --response y --method dp --grid-file grid.json
//   cpreg simulate  --n 600 --p 200 --kappa 6 --d0 10 --seed 3 --output sim.csv
//   cpreg benchmark --kappa 4,5,6 --d0 10 --methods dp,dp-lr --reps 20 --output bench.json --table bench.tsv
//
// Every subcommand also takes --config FILE with one key=value per line (keys are long flag
// names without dashes); flags given on the command line win over the file.

#include "cpreg/evaluation.hpp"
#include "cpreg/io.hpp"
#include "cpreg/pipeline.hpp"
#include "cpreg/simulation.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace cpreg;

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Expands `--config FILE` into command-line tokens placed after the subcommand name.
std::vector<std::string> expand_config(std::vector<std::string> args)
{
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i)
    {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[++i];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
        else
            rest.push_back(args[i]);
    }
    if (path.empty())
        return rest;

    std::ifstream in(path);
    if (!in)
        throw CpregError(ErrorCode::file_not_found, "cannot open config file '" + path + "'");
    std::set<std::string> given;
    for (const auto& a : rest)
        if (a.rfind("--", 0) == 0)
            given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));

    std::vector<std::string> injected;
    std::string line;
    while (std::getline(in, line))
    {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CpregError(ErrorCode::usage, "config line without '=': " + line);
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (given.count(key) || given.count("no-" + key))
            continue;
        if (value == "true" || value == "false")
        {
            if (value == "true")
                injected.push_back("--" + key);
            else if (key == "standardize")
                injected.push_back("--no-standardize");
            continue;
        }
        injected.push_back("--" + key + "=" + value);
    }
    // Insert right after the subcommand token (the first non-option argument).
    std::size_t at = rest.size();
    for (std::size_t i = 0; i < rest.size(); ++i)
        if (rest[i].rfind("-", 0) != 0)
        {
            at = i + 1;
            break;
        }
    rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
    return rest;
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw CpregError(ErrorCode::file_not_found, "cannot write '" + path + "'");
    out << text;
}

TuningGrid read_grid(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw CpregError(ErrorCode::file_not_found, "cannot open grid file '" + path + "'");
    nlohmann::json j;
    try
    {
        in >> j;
        TuningGrid g;
        g.lambdas = j.at("lambda").get<std::vector<double>>();
        g.gammas = j.at("gamma").get<std::vector<double>>();
        if (j.contains("zeta"))
            g.zetas = j.at("zeta").get<std::vector<double>>();
        return g;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw CpregError(ErrorCode::invalid_input, "grid file '" + path + "': " + e.what());
    }
}

struct DetectArgs
{
    std::string input, response, index_column, method = "dp", grid_file, output, cv_strategy = "staged";
    std::vector<std::string> covariates;
    std::optional<double> lambda, gamma, zeta;
    bool cv = false, standardize = true, standardize_covariates = false, timing = false;
    std::uint64_t seed = 1;
    Index stride = 1, min_seg_len = 2;
    unsigned threads = 1;
};

void add_detect_options(CLI::App* cmd, DetectArgs& a)
{
    cmd->add_option("--input", a.input, "CSV file with a header row")->required();
    cmd->add_option("--response", a.response, "response column")->required();
    cmd->add_option("--covariates", a.covariates, "covariate columns (default: all other columns)")->delimiter(',');
    cmd->add_option("--index-column", a.index_column, "column whose values label the change points");
    cmd->add_option("--method", a.method, "dp | dp-lr | binseg")->check(CLI::IsMember({"dp", "dp-lr", "binseg"}));
    cmd->add_option("--lambda", a.lambda, "Lasso penalty");
    cmd->add_option("--gamma", a.gamma, "per-segment penalty");
    cmd->add_option("--zeta", a.zeta, "refinement group penalty (dp-lr)");
    cmd->add_flag("--cv", a.cv, "tune by odd/even cross-validation");
    cmd->add_option("--cv-strategy", a.cv_strategy, "dp-lr search: staged (lambda, gamma first) | joint")
        ->check(CLI::IsMember({"staged", "joint"}));
    cmd->add_option("--grid-file", a.grid_file, "JSON grid {\"lambda\":[..],\"gamma\":[..],\"zeta\":[..]}");
    cmd->add_option("--seed", a.seed, "recorded in the report");
    cmd->add_option("--stride", a.stride, "candidate endpoint stride")->check(CLI::PositiveNumber);
    cmd->add_option("--min-seg-len", a.min_seg_len, "minimum segment length")->check(CLI::PositiveNumber);
    cmd->add_flag("--standardize,!--no-standardize", a.standardize, "scale the response to unit variance");
    cmd->add_flag("--standardize-covariates", a.standardize_covariates, "z-score every covariate");
    cmd->add_option("--threads", a.threads, "worker threads");
    cmd->add_flag("--timing", a.timing, "add wall time to the diagnostics");
    cmd->add_option("--output", a.output, "report path (default stdout)");
}

RunSpec to_spec(const DetectArgs& a)
{
    RunSpec spec;
    spec.input = a.input;
    spec.response = a.response;
    spec.covariates = a.covariates;
    if (!a.index_column.empty())
        spec.index_column = a.index_column;
    spec.method = parse_method(a.method);
    spec.tuning = a.cv ? TuningMode::cv : TuningMode::fixed;
    spec.lambda = a.lambda;
    spec.gamma = a.gamma;
    spec.zeta = a.zeta;
    if (!a.grid_file.empty())
        spec.grid = read_grid(a.grid_file);
    spec.cv_strategy = a.cv_strategy == "joint" ? CvStrategy::joint : CvStrategy::staged;
    spec.standardize_response = a.standardize;
    spec.standardize_covariates = a.standardize_covariates;
    spec.seed = a.seed;
    spec.options.stride = a.stride;
    spec.options.min_seg_len = a.min_seg_len;
    spec.options.threads = a.threads;
    spec.timing = a.timing;
    return spec;
}

struct SimulateArgs
{
    Index n = 600, p = 200, d0 = 10;
    std::vector<Index> change_points{121, 221, 351, 451};
    double kappa = 4.0, sigma_eps = 1.0;
    std::uint64_t seed = 1;
    std::string pattern = "alternating", output, truth_output;
};

SimulationConfig to_config(const SimulateArgs& a)
{
    SimulationConfig cfg;
    cfg.n = a.n;
    cfg.p = a.p;
    cfg.d0 = a.d0;
    cfg.change_points = a.change_points;
    cfg.kappa = a.kappa;
    cfg.sigma_eps = a.sigma_eps;
    cfg.seed = a.seed;
    cfg.pattern = a.pattern == "random" ? BetaPattern::random_sign : BetaPattern::alternating_sign;
    return cfg;
}

void add_simulation_options(CLI::App* cmd, SimulateArgs& a)
{
    cmd->add_option("--n", a.n, "number of time points");
    cmd->add_option("--p", a.p, "covariate dimension");
    cmd->add_option("--change-points", a.change_points, "true change points")->delimiter(',');
    cmd->add_option("--sigma-eps", a.sigma_eps, "noise standard deviation");
    cmd->add_option("--pattern", a.pattern, "alternating | random")->check(CLI::IsMember({"alternating", "random"}));
}

int run(int argc, char** argv)
{
    CLI::App app{"Change point localization in high-dimensional linear regression"};
    app.require_subcommand(1);

    DetectArgs det;
    auto* detect_cmd = app.add_subcommand("detect", "detect change points in a CSV time series");
    add_detect_options(detect_cmd, det);

    DetectArgs tun;
    auto* tune_cmd = app.add_subcommand("tune", "run the odd/even cross-validation grid only");
    add_detect_options(tune_cmd, tun);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "write a simulated dataset as CSV");
    add_simulation_options(sim_cmd, sim);
    sim_cmd->add_option("--kappa", sim.kappa, "jump size");
    sim_cmd->add_option("--d0", sim.d0, "support size");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--output", sim.output, "CSV path (default stdout)");
    sim_cmd->add_option("--truth-output", sim.truth_output, "JSON file for the true change points");

    SimulateArgs bsim;
    std::vector<double> kappas{4.0, 5.0, 6.0};
    std::vector<Index> d0s{10};
    std::vector<std::string> methods{"dp", "dp-lr"};
    int reps = 20;
    std::uint64_t bseed = 1;
    Index bstride = 5, bmin = 10;
    bool center = false;
    unsigned bthreads = 1;
    std::string bgrid, bout, btable, bstrategy = "staged";
    auto* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo scaled-Hausdorff table");
    add_simulation_options(bench_cmd, bsim);
    bench_cmd->add_option("--kappa", kappas, "jump sizes")->delimiter(',');
    bench_cmd->add_option("--d0", d0s, "support sizes")->delimiter(',');
    bench_cmd->add_option("--methods", methods, "dp, dp-lr, binseg")->delimiter(',');
    bench_cmd->add_option("--reps", reps, "replicates per setting")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bseed, "replicate r uses seed + r");
    bench_cmd->add_option("--stride", bstride, "candidate endpoint stride")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--min-seg-len", bmin, "minimum segment length")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--center-lambda", center, "centre the lambda grid on the oracle-segment lambda");
    bench_cmd->add_option("--grid-file", bgrid, "JSON tuning grid");
    bench_cmd->add_option("--cv-strategy", bstrategy, "dp-lr search: staged | joint")
        ->check(CLI::IsMember({"staged", "joint"}));
    bench_cmd->add_option("--threads", bthreads, "replicates run in parallel");
    bench_cmd->add_option("--output", bout, "JSON path (default stdout)");
    bench_cmd->add_option("--table", btable, "tab-separated summary path");

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    try
    {
        app.parse(args);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorCode::usage);
    }

    if (detect_cmd->parsed())
    {
        const auto report = run_pipeline(to_spec(det));
        emit(det.output, report.dump(2) + "\n");
    }
    else if (tune_cmd->parsed())
    {
        RunSpec spec = to_spec(tun);
        const LoadedData loaded = load_csv(spec.input, {spec.response, spec.covariates, spec.index_column});
        Dataset data = loaded.data;
        if (spec.standardize_response)
            data = standardize_response(data).first;
        if (spec.standardize_covariates)
            data = standardize_covariates(data);
        TuningGrid grid =
            spec.grid ? *spec.grid : TuningGrid::defaults(data.n(), data.p(), spec.method == Method::dp_lr);
        if (spec.method == Method::dp_lr && !grid.zetas)
            grid.zetas = TuningGrid::defaults(data.n(), data.p(), true).zetas;
        const CvResult cv = cross_validate(data, spec.method, grid, spec.options, spec.cv_strategy);
        nlohmann::json table = nlohmann::json::array();
        for (const auto& e : cv.table)
        {
            nlohmann::json row{{"lambda", e.point.lambda}, {"gamma", e.point.gamma},
                               {"validation_loss", e.validation_loss}, {"k_hat", e.k_hat}};
            if (e.point.zeta)
                row["zeta"] = *e.point.zeta;
            table.push_back(std::move(row));
        }
        auto point = [](const TuningPoint& t) {
            nlohmann::json j{{"lambda", t.lambda}, {"gamma", t.gamma}};
            if (t.zeta)
                j["zeta"] = *t.zeta;
            return j;
        };
        nlohmann::json out{{"method", std::string(method_name(spec.method))},
                           {"selected", point(cv.best)},
                           {"full_data_parameters", point(cv.full)},
                           {"selected_validation_loss", cv.best_loss},
                           {"train_change_points", cv.train_changepoints.locations()},
                           {"table", table}};
        emit(tun.output, out.dump(2) + "\n");
    }
    else if (sim_cmd->parsed())
    {
        const SimulatedData data = generate_simulation(to_config(sim));
        std::vector<std::string> names;
        for (Index j = 1; j <= data.data.p(); ++j)
            names.push_back("x" + std::to_string(j));
        std::ostringstream os;
        write_csv(os, data.data, names, "y");
        emit(sim.output, os.str());
        if (!sim.truth_output.empty())
        {
            nlohmann::json truth{{"n", data.data.n()}, {"p", data.data.p()}, {"change_points", data.truth.locations()},
                                 {"kappa", sim.kappa}, {"d0", sim.d0}, {"seed", sim.seed}};
            emit(sim.truth_output, truth.dump(2) + "\n");
        }
    }
    else if (bench_cmd->parsed())
    {
        std::vector<BenchmarkSetting> settings;
        for (double kappa : kappas)
            for (Index d0 : d0s)
            {
                SimulateArgs a = bsim;
                a.kappa = kappa;
                a.d0 = d0;
                std::ostringstream name;
                name << "kappa=" << kappa << ",d0=" << d0;
                settings.push_back({name.str(), to_config(a)});
            }
        std::vector<BenchmarkMethod> bms;
        for (const auto& m : methods)
        {
            BenchmarkMethod bm;
            bm.label = m;
            bm.method = parse_method(m);
            if (!bgrid.empty())
                bm.grid = read_grid(bgrid);
            bm.center_lambda = center;
            bm.cv_strategy = bstrategy == "joint" ? CvStrategy::joint : CvStrategy::staged;
            bm.options.stride = bstride;
            bm.options.min_seg_len = bmin;
            bms.push_back(std::move(bm));
        }
        const BenchmarkTable table = run_benchmark(settings, bms, reps, bseed, bthreads);
        emit(bout, to_json(table).dump(2) + "\n");
        if (!btable.empty())
            emit(btable, to_tsv(table));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    ErrorCode code = ErrorCode::internal;
    std::string message;
    try
    {
        return run(argc, argv);
    }
    catch (const CpregError& e)
    {
        code = e.code();
        message = e.what();
    }
    catch (const ValidationError& e)
    {
        code = ErrorCode::invalid_input;
        message = e.what();
    }
    catch (const std::exception& e)
    {
        message = e.what();
    }
    std::cout << error_report(code, message).dump(2) << "\n";
    std::cerr << "cpreg: " << message << "\n";
    return static_cast<int>(code);
}
