// Command-line front end.
//
// Exit codes: 0 success, 1 certificate bound violated, 2 input or
// configuration error, 3 estimator failure, 4 solver failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <magging/io.hpp>
#include <magging/magging.hpp>

namespace {

using namespace magging;
using json = nlohmann::json;

enum Exit : int { kOk = 0, kBoundViolated = 1, kInput = 2, kEstimator = 3, kSolver = 4 };

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(what + ": '" + s + "' is not a number");
    }
}

Index to_index(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size() || v < 0) throw std::invalid_argument(s);
        return static_cast<Index>(v);
    } catch (const std::exception&) {
        throw InputError(what + ": '" + s + "' is not a non-negative integer");
    }
}

EstimatorSpec parse_estimator(const std::string& text)
{
    const auto parts = split(text, ':');
    if (parts.empty()) throw InputError("--estimator: empty value");
    EstimatorSpec spec;
    if (parts[0] == "ols" && parts.size() == 1) {
        spec = EstimatorSpec::ols();
    } else if (parts[0] == "ridge" && parts.size() == 2) {
        spec = EstimatorSpec::ridge(to_double(parts[1], "--estimator ridge"));
    } else if (parts[0] == "lasso" && parts.size() <= 2) {
        spec = parts.size() == 2 ? EstimatorSpec::lasso(to_double(parts[1], "--estimator lasso")) : EstimatorSpec::lasso();
    } else {
        throw InputError("--estimator: expected ols, ridge:LAMBDA or lasso[:LAMBDA], got '" + text + "'");
    }
    spec.validate();
    return spec;
}

struct SchemeRequest {
    enum Kind { Mean, Magging, Pooled, Stack } kind = Mean;
    StackingConfig stacking;
};

SchemeRequest parse_scheme(const std::string& text, LeaveOut default_leaveout)
{
    SchemeRequest req;
    std::string body = text;
    std::optional<LeaveOut> leaveout;
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const std::string lo = text.substr(slash + 1);
        body = text.substr(0, slash);
        if (lo == "loo")
            leaveout = LeaveOut::LeaveOneOut;
        else if (lo == "oob")
            leaveout = LeaveOut::OutOfBag;
        else
            throw InputError("--scheme: unknown leave-out scheme '" + lo + "' (loo or oob)");
    }
    const auto parts = split(body, ':');
    if (body == "mean") {
        req.kind = SchemeRequest::Mean;
    } else if (body == "magging") {
        req.kind = SchemeRequest::Magging;
    } else if (body == "pooled") {
        req.kind = SchemeRequest::Pooled;
    } else if (parts.size() >= 2 && parts[0] == "stack") {
        req.kind = SchemeRequest::Stack;
        if (parts[1] == "convex" && parts.size() == 2)
            req.stacking.constraint = StackConstraint::Convex;
        else if (parts[1] == "sign" && parts.size() == 2)
            req.stacking.constraint = StackConstraint::Sign;
        else if (parts[1] == "ridge" && parts.size() == 3) {
            req.stacking.constraint = StackConstraint::Ridge;
            req.stacking.radius = to_double(parts[2], "--scheme stack:ridge");
        } else {
            throw InputError("--scheme: expected stack:convex, stack:sign or stack:ridge:S, got '" + text + "'");
        }
        req.stacking.leaveout = leaveout.value_or(default_leaveout);
        req.stacking.validate();
    } else {
        throw InputError("--scheme: unknown scheme '" + text + "'");
    }
    if (leaveout && req.kind != SchemeRequest::Stack) throw InputError("--scheme: a leave-out suffix only applies to stacking");
    return req;
}

/// known | blocks:G | subsample:G,m | meta
Grouping parse_groups(const std::string& text, const io::Dataset& data, std::uint64_t seed, const io::SimTruth* truth)
{
    const Index n = data.x.rows();
    const auto parts = split(text, ':');
    if (text == "known") {
        if (!data.groups) throw InputError("--groups known: the input CSV has no 'group' column");
        return known_groups(*data.groups);
    }
    if (text == "meta") {
        if (!truth || !truth->grouping) throw InputError("--groups meta: the metadata file carries no grouping");
        if (truth->grouping->n != n) throw InputError("--groups meta: grouping size differs from the dataset");
        truth->grouping->validate();
        return *truth->grouping;
    }
    if (parts.size() == 2 && parts[0] == "blocks") return consecutive_blocks(n, to_index(parts[1], "--groups blocks"));
    if (parts.size() == 2 && parts[0] == "subsample") {
        const auto gm = split(parts[1], ',');
        if (gm.size() != 2) throw InputError("--groups subsample: expected subsample:G,m");
        return random_subsample(n, to_index(gm[0], "--groups subsample G"), to_index(gm[1], "--groups subsample m"), seed);
    }
    throw InputError("--groups: expected known, blocks:G, subsample:G,m or meta, got '" + text + "'");
}

/// Writes to the file or, for an empty path, to stdout.
void emit(const std::string& path, const std::string& content)
{
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
    if (!out) throw InputError("write failed for '" + path + "'");
}

QpOptions qp_options(double tol)
{
    if (!(tol > 0.0)) throw InputError("--tol must be > 0");
    QpOptions o;
    o.tol = tol;
    return o;
}

std::string tidy_row(const std::string& a, const std::string& b, const std::string& c, double v)
{
    return a + "," + b + "," + c + "," + io::format_double(v) + "\n";
}

// ------------------------------------------------------------------- fit

struct FitArgs {
    std::string input;
    std::string groups = "known";
    std::string estimator = "lasso";
    std::vector<std::string> schemes;
    std::string leaveout = "loo";
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    double tol = 1e-9;
    std::string meta;
    bool intercept = false;
    bool standardize = false;
};

int cmd_fit(const FitArgs& a)
{
    const io::Dataset data = io::read_dataset(a.input);
    std::optional<io::SimTruth> truth;
    if (!a.meta.empty()) truth = io::truth_from_metadata(io::read_json(a.meta));

    EstimatorSpec spec = parse_estimator(a.estimator);
    spec.intercept = a.intercept;
    spec.standardize = a.standardize;
    const LeaveOut default_lo = a.leaveout == "oob" ? LeaveOut::OutOfBag : LeaveOut::LeaveOneOut;
    if (a.leaveout != "loo" && a.leaveout != "oob") throw InputError("--leaveout: expected loo or oob");
    std::vector<SchemeRequest> requests;
    for (const auto& s : a.schemes.empty() ? std::vector<std::string>{"magging"} : a.schemes)
        requests.push_back(parse_scheme(s, default_lo));
    const QpOptions opts = qp_options(a.tol);

    const Grouping grouping = parse_groups(a.groups, data, a.seed, truth ? &*truth : nullptr);
    const Ensemble ens = fit_ensemble(data.x, data.y, grouping, spec);

    std::vector<AggregationResult> results;
    for (const auto& r : requests) {
        switch (r.kind) {
        case SchemeRequest::Mean: results.push_back(mean_aggregate(ens)); break;
        case SchemeRequest::Magging: results.push_back(magging_aggregate(ens, opts)); break;
        case SchemeRequest::Pooled: results.push_back(pooled_result(fit_pooled(data.x, data.y, spec))); break;
        case SchemeRequest::Stack: results.push_back(stacked_aggregate(ens, data.x, data.y, r.stacking, opts)); break;
        }
    }

    // Comparisons against the ground truth, when a metadata file is given.
    if (truth) {
        for (auto& r : results) {
            if (truth->common_signal && truth->recording_length > 0) {
                const Index len = truth->recording_length;
                if (data.x.rows() < len) throw InputError("--meta: recording length exceeds the dataset");
                r.diagnostics["mse_common_signal"] = signal_mse(data.x.topRows(len), r.theta, *truth->common_signal, r.intercept);
            }
            if (truth->majority_b && truth->majority_b->size() == r.theta.size())
                r.diagnostics["sigma_dist_majority"] = linalg::sigma_norm_sq(r.theta - *truth->majority_b, truth->sigma);
        }
    }

    for (const auto& f : ens.fits)
        if (!f.converged) std::cerr << "warning: an ensemble member did not converge\n";

    if (a.format == "csv") {
        std::string csv = "scheme,field,index,value\n";
        for (const auto& r : results) {
            for (Index j = 0; j < r.theta.size(); ++j) csv += tidy_row(r.scheme, "theta", std::to_string(j), r.theta(j));
            for (Index g = 0; g < r.weights.size(); ++g) csv += tidy_row(r.scheme, "weight", std::to_string(g), r.weights(g));
            if (r.intercept != 0.0) csv += tidy_row(r.scheme, "intercept", "0", r.intercept);
            for (const auto& [k, v] : r.diagnostics) csv += tidy_row(r.scheme, k, "0", v);
        }
        emit(a.out, csv);
    } else if (a.format == "json") {
        json doc = {{"input", a.input}, {"n", data.x.rows()}, {"p", data.x.cols()}, {"ensemble", io::to_json(ens)}};
        json arr = json::array();
        for (const auto& r : results) arr.push_back(io::to_json(r));
        doc["results"] = arr;
        emit(a.out, doc.dump(2) + "\n");
    } else {
        throw InputError("--format: expected json or csv");
    }
    return kOk;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string scenario = "clusterwise";
    std::string out;
    std::uint64_t seed = 0;
    MixtureSimConfig mixture;
    PeriodicSimConfig periodic;
    double noise_sd = 1.0;
    bool independent_frequencies = false;
};

int cmd_simulate(SimulateArgs a)
{
    const Scenario scenario = scenario_from_string(a.scenario);
    SimOutput sim;
    json config;
    if (scenario == Scenario::Periodic) {
        auto& c = a.periodic;
        c.seed = a.seed;
        c.noise_sd = a.noise_sd;
        c.shared_frequencies = !a.independent_frequencies;
        sim = simulate_periodic(c);
        config = {{"G", c.num_groups},
                  {"recording_length", c.n_per_group},
                  {"dict_size", c.dict_size},
                  {"common_components", c.common_components},
                  {"per_group_components", c.per_group_components},
                  {"noise_sd", c.noise_sd},
                  {"common_amplitude", c.common_amplitude},
                  {"group_amplitude", c.group_amplitude},
                  {"shared_frequencies", c.shared_frequencies}};
    } else {
        auto& c = a.mixture;
        c.seed = a.seed;
        c.noise_sd = a.noise_sd;
        c.scenario = scenario;
        sim = simulate_mixture(c);
        config = {{"n", c.n},
                  {"p", c.p},
                  {"G", c.num_groups},
                  {"noise_sd", c.noise_sd},
                  {"coefficient_scale", c.coefficient_scale},
                  {"contamination_fraction", c.contamination_fraction},
                  {"outlier_scale", c.outlier_scale},
                  {"group_size", c.group_size},
                  {"orthogonal_design", c.orthogonal_design}};
    }
    std::ostringstream csv;
    io::write_dataset(csv, sim.x, sim.y, sim.labels.empty() ? nullptr : &sim.labels);
    emit(a.out + ".csv", csv.str());
    emit(a.out + ".json", io::sim_metadata(sim, config).dump(2) + "\n");
    std::cerr << "wrote " << a.out << ".csv and " << a.out << ".json (n = " << sim.n() << ", p = " << sim.p() << ")\n";
    return kOk;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
    std::string support;
    std::string sigma;
    bool grid = false;
    double grid_step = 0.01;
    double grid_radius = 0.0;
    std::string add;
    std::string out;
    double tol = 1e-9;
};

json maximin_json(const MaximinPoint& m)
{
    return {{"point", io::vector_json(m.point)}, {"weights", io::vector_json(m.weights)}, {"sigma_norm_sq", m.norm_sq}, {"gap", m.gap}};
}

int cmd_oracle(const OracleArgs& a)
{
    const Matrix pts = io::read_matrix_csv(a.support, "support");
    SupportSpec spec;
    for (Index k = 0; k < pts.rows(); ++k) spec.points.push_back(pts.row(k).transpose());
    spec.sigma = a.sigma.empty() ? Matrix(Matrix::Identity(pts.cols(), pts.cols())) : io::read_matrix_csv(a.sigma, "sigma");
    const QpOptions opts = qp_options(a.tol);

    const MaximinPoint mp = maximin_point(spec, opts);
    json doc = {{"p", spec.dim()}, {"support_size", spec.points.size()}, {"maximin", maximin_json(mp)}};
    if (a.grid) {
        const GridOracleResult g = maximin_by_definition(spec, a.grid_step, a.grid_radius);
        doc["grid"] = {{"point", io::vector_json(g.point)},
                       {"value", g.value},
                       {"step", a.grid_step},
                       {"radius_too_small", g.radius_too_small},
                       {"max_abs_difference", (g.point - mp.point).cwiseAbs().maxCoeff()}};
    }
    if (!a.add.empty()) {
        const auto cells = split(a.add, ',');
        Vector extra(static_cast<Index>(cells.size()));
        for (std::size_t k = 0; k < cells.size(); ++k) extra(static_cast<Index>(k)) = to_double(cells[k], "--add");
        const auto [before, after] = robustness_delta(spec, extra, opts);
        doc["robustness"] = {{"added", io::vector_json(extra)}, {"before", maximin_json(before)}, {"after", maximin_json(after)}};
    }
    emit(a.out, doc.dump(2) + "\n");
    return kOk;
}

// --------------------------------------------------------------- certify

struct CertifyArgs {
    std::string input;
    std::string meta;
    std::string groups = "known";
    std::string estimator = "ols";
    std::uint64_t seed = 0;
    std::string out;
    double tol = 1e-9;
};

int cmd_certify(const CertifyArgs& a)
{
    const io::Dataset data = io::read_dataset(a.input);
    if (a.meta.empty()) throw InputError("certify: --meta with the ground truth is required");
    const io::SimTruth truth = io::truth_from_metadata(io::read_json(a.meta));
    if (!truth.has_truth()) throw InputError("certify: metadata has no true_B");
    if (truth.p != data.x.cols() || truth.n != data.x.rows()) throw InputError("certify: metadata does not match the dataset");

    const EstimatorSpec spec = parse_estimator(a.estimator);
    const QpOptions opts = qp_options(a.tol);
    const Grouping grouping = parse_groups(a.groups, data, a.seed, &truth);
    const Ensemble ens = fit_ensemble(data.x, data.y, grouping, spec);
    const AggregationResult mg = magging_aggregate(ens, opts);

    SupportSpec support;
    support.points = truth.group_optimal(grouping, data.groups ? &*data.groups : nullptr);
    support.sigma = truth.sigma;
    const BoundCertificate cert = theorem1_certificate(ens, data.x, support, mg, opts);
    json doc = io::to_json(cert);
    doc["magging"] = io::to_json(mg);
    emit(a.out, doc.dump(2) + "\n");
    if (!cert.holds) {
        std::cerr << "certificate violated: lhs " << cert.lhs << " > bound " << cert.bound << "\n";
        return kBoundViolated;
    }
    return kOk;
}

// ---------------------------------------------------------------- figure

struct FigureArgs {
    std::string name;
    std::uint64_t seed = 0;
    std::string out;
    PeriodicSimConfig periodic;
    std::string estimator = "ols";
    Index shown = 11;
    bool independent_frequencies = false;
};

std::string figure_fig3(FigureArgs a)
{
    a.periodic.seed = a.seed;
    a.periodic.shared_frequencies = !a.independent_frequencies;
    const PeriodicRun run = run_periodic(a.periodic, parse_estimator(a.estimator));
    const Index len = a.periodic.n_per_group;
    const Index shown = std::min<Index>(a.shown, a.periodic.num_groups);

    std::string csv = "panel,series,time,value\n";
    auto series = [&](const std::string& panel, const std::string& name, const Vector& values) {
        for (Index t = 0; t < values.size(); ++t) csv += tidy_row(panel, name, std::to_string(t), values(t));
    };
    series("common", "common_signal", *run.sim.common_signal);

    // Amplitude per frequency j = 1..dict_size: common part and recording 1.
    Vector common_amp(a.periodic.dict_size), group_amp(a.periodic.dict_size);
    const Vector common_coef = linalg::gram(run.dictionary, true).ldlt().solve(
        run.dictionary.transpose() * *run.sim.common_signal / static_cast<double>(len));
    for (Index j = 0; j < a.periodic.dict_size; ++j) {
        common_amp(j) = std::hypot(common_coef(2 * j), common_coef(2 * j + 1));
        const Vector b = run.sim.group_b.col(0);
        group_amp(j) = std::hypot(b(2 * j) - common_coef(2 * j), b(2 * j + 1) - common_coef(2 * j + 1));
    }
    for (Index j = 0; j < a.periodic.dict_size; ++j) {
        csv += tidy_row("spectrum", "common", std::to_string(j + 1), common_amp(j));
        csv += tidy_row("spectrum", "group_1", std::to_string(j + 1), group_amp(j));
    }
    for (Index g = 0; g < shown; ++g) {
        series("recordings", "group_" + std::to_string(g + 1), run.sim.y.segment(g * len, len));
        series("estimates", "group_" + std::to_string(g + 1),
               fitted_values(run.dictionary, run.ensemble.thetas[static_cast<std::size_t>(g)]));
    }
    series("aggregates", "pooled", predict(run.pooled, run.dictionary));
    series("aggregates", "mean", predict(run.mean, run.dictionary));
    series("aggregates", "magging", predict(run.magging, run.dictionary));
    std::cerr << "fig3 MSE to common signal: pooled " << run.mse_pooled << ", mean " << run.mse_mean << ", magging "
              << run.mse_magging << "\n";
    return csv;
}

std::string figure_robustness(const FigureArgs& a)
{
    const RobustnessRun run = run_robustness(a.seed);
    std::string csv = "panel,series,x,y\n";
    auto point = [&](const std::string& panel, const std::string& series, const Vector& v) {
        csv += panel + "," + series + "," + io::format_double(v(0)) + "," + io::format_double(v(1)) + "\n";
    };
    const std::pair<const char*, const Vector*> panels[] = {{"halfspace", &run.kept}, {"shift", &run.moved}};
    for (const auto& [panel, extra] : panels) {
        for (const auto& b : run.support.points) point(panel, "support", b);
        point(panel, "added", *extra);
        point(panel, "maximin_before", run.before.point);
        point(panel, "maximin_after", extra == &run.kept ? run.after_kept.point : run.after_moved.point);
    }
    return csv;
}

int cmd_figure(const FigureArgs& a)
{
    if (a.name == "fig3")
        emit(a.out, figure_fig3(a));
    else if (a.name == "robustness")
        emit(a.out, figure_robustness(a));
    else
        throw InputError("figure: unknown experiment '" + a.name + "' (fig3 or robustness)");
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Maximin aggregation (magging) and baseline aggregation of grouped regression fits"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "magging 1.0.0");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit per-group estimators and aggregate them");
    fit_cmd->add_option("input", fit.input, "Dataset CSV (columns y, x1..xp, optional group)")->required();
    fit_cmd->add_option("--groups", fit.groups, "known | blocks:G | subsample:G,m | meta")->capture_default_str();
    fit_cmd->add_option("--estimator", fit.estimator, "ols | ridge:LAMBDA | lasso[:LAMBDA]")->capture_default_str();
    fit_cmd->add_option("--scheme", fit.schemes,
                        "mean | magging | pooled | stack:convex | stack:sign | stack:ridge:S, optional /loo or /oob; repeatable");
    fit_cmd->add_option("--leaveout", fit.leaveout, "Default stacking leave-out scheme: loo | oob")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed, "Seed for subsampled groups")->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "Output file (stdout when omitted)");
    fit_cmd->add_option("--format", fit.format, "json | csv")->capture_default_str();
    fit_cmd->add_option("--tol", fit.tol, "Duality-gap tolerance of the simplex QP")->capture_default_str();
    fit_cmd->add_option("--meta", fit.meta, "Simulation metadata JSON; adds ground-truth diagnostics");
    fit_cmd->add_flag("--intercept", fit.intercept, "Fit an unpenalised intercept per group");
    fit_cmd->add_flag("--standardize", fit.standardize, "Scale columns to unit RMS before fitting");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Write a simulated dataset (PREFIX.csv) and its metadata (PREFIX.json)");
    sim_cmd->add_option("--scenario", sim.scenario, "clusterwise | smooth_drift | outlier_contamination | periodic")
        ->capture_default_str();
    sim_cmd->add_option("--out", sim.out, "Output prefix")->required();
    sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
    sim_cmd->add_option("--n", sim.mixture.n, "Sample count (mixture scenarios)")->capture_default_str();
    sim_cmd->add_option("--p", sim.mixture.p, "Predictor count (mixture scenarios)")->capture_default_str();
    sim_cmd->add_option("--groups-count,-G", sim.mixture.num_groups, "Number of groups (mixture scenarios)")->capture_default_str();
    sim_cmd->add_option("--noise-sd", sim.noise_sd)->capture_default_str();
    sim_cmd->add_option("--coefficient-scale", sim.mixture.coefficient_scale)->capture_default_str();
    sim_cmd->add_option("--contamination", sim.mixture.contamination_fraction, "Outlier fraction in [0, 0.5)")->capture_default_str();
    sim_cmd->add_option("--outlier-scale", sim.mixture.outlier_scale)->capture_default_str();
    sim_cmd->add_option("--group-size", sim.mixture.group_size, "Subsample size m for outlier data (0: floor(n/G))")
        ->capture_default_str();
    sim_cmd->add_flag("--orthogonal-design", sim.mixture.orthogonal_design, "Clusterwise design with exactly identity Gram per group");
    sim_cmd->add_option("--length", sim.periodic.n_per_group, "Recording length P (periodic)")->capture_default_str();
    sim_cmd->add_option("--recordings", sim.periodic.num_groups, "Number of recordings G (periodic)")->capture_default_str();
    sim_cmd->add_option("--dict-size", sim.periodic.dict_size)->capture_default_str();
    sim_cmd->add_option("--common-components", sim.periodic.common_components)->capture_default_str();
    sim_cmd->add_option("--group-components", sim.periodic.per_group_components)->capture_default_str();
    sim_cmd->add_option("--common-amplitude", sim.periodic.common_amplitude)->capture_default_str();
    sim_cmd->add_option("--group-amplitude", sim.periodic.group_amplitude)->capture_default_str();
    sim_cmd->add_flag("--independent-frequencies", sim.independent_frequencies,
                      "Each recording draws its own extra frequencies (default: one shared set)");

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle", "Population maximin point of a finite support");
    oracle_cmd->add_option("--support", oracle.support, "CSV, one support point per row")->required();
    oracle_cmd->add_option("--sigma", oracle.sigma, "CSV covariance matrix (identity when omitted)");
    oracle_cmd->add_flag("--grid", oracle.grid, "Cross-check against the brute-force definition (p <= 3)");
    oracle_cmd->add_option("--grid-step", oracle.grid_step)->capture_default_str();
    oracle_cmd->add_option("--grid-radius", oracle.grid_radius, "0 selects 1.5 x the largest |coordinate|")->capture_default_str();
    oracle_cmd->add_option("--add", oracle.add, "Comma-separated point to append, reporting the maximin point before and after");
    oracle_cmd->add_option("--out", oracle.out);
    oracle_cmd->add_option("--tol", oracle.tol)->capture_default_str();

    CertifyArgs cert;
    auto* cert_cmd = app.add_subcommand("certify", "Check the magging estimation-error bound on simulated data");
    cert_cmd->add_option("input", cert.input, "Dataset CSV")->required();
    cert_cmd->add_option("--meta", cert.meta, "Simulation metadata JSON with true_B");
    cert_cmd->add_option("--groups", cert.groups, "known | blocks:G | subsample:G,m | meta")->capture_default_str();
    cert_cmd->add_option("--estimator", cert.estimator)->capture_default_str();
    cert_cmd->add_option("--seed", cert.seed)->capture_default_str();
    cert_cmd->add_option("--out", cert.out);
    cert_cmd->add_option("--tol", cert.tol)->capture_default_str();

    FigureArgs fig;
    auto* fig_cmd = app.add_subcommand("figure", "Emit plot data as tidy CSV");
    fig_cmd->add_option("name", fig.name, "fig3 | robustness")->required();
    fig_cmd->add_option("--seed", fig.seed)->capture_default_str();
    fig_cmd->add_option("--out", fig.out);
    fig_cmd->add_option("--estimator", fig.estimator)->capture_default_str();
    fig_cmd->add_option("--shown", fig.shown, "Recordings to emit")->capture_default_str();
    fig_cmd->add_option("--length", fig.periodic.n_per_group)->capture_default_str();
    fig_cmd->add_option("--noise-sd", fig.periodic.noise_sd)->capture_default_str();
    fig_cmd->add_flag("--independent-frequencies", fig.independent_frequencies);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInput;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit);
        if (*sim_cmd) return cmd_simulate(sim);
        if (*oracle_cmd) return cmd_oracle(oracle);
        if (*cert_cmd) return cmd_certify(cert);
        if (*fig_cmd) return cmd_figure(fig);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const EstimatorError& e) {
        std::cerr << "estimator error: " << e.what() << "\n";
        return kEstimator;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolver;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
