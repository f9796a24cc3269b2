#include "specdegen/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <CLI11.hpp>

#include "specdegen/airy.hpp"
#include "specdegen/domains.hpp"
#include "specdegen/errors.hpp"
#include "specdegen/forms.hpp"
#include "specdegen/halfline.hpp"
#include "specdegen/parallel.hpp"
#include "specdegen/profile.hpp"
#include "specdegen/separation.hpp"

namespace specdegen {

namespace {

using nlohmann::json;

std::string istr(long long v) { return std::to_string(v); }

void check_decreasing(const std::vector<double>& g, const char* what) {
    for (size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0) || !std::isfinite(g[i])) fail_validation(std::string(what) + ": entries must be positive");
        if (i && !(g[i] < g[i - 1])) fail_validation(std::string(what) + ": must be strictly decreasing");
    }
}

// First `modes` transverse eigenvalues, or the single override mu.
std::vector<double> transverse_modes(const std::string& spec, int modes, std::optional<double> mu) {
    if (mu) {
        if (!(*mu > 0)) fail_validation("mu must be positive");
        return {*mu};
    }
    if (modes < 1) fail_validation("modes must be >= 1");
    double mu_max = 1.0;
    for (int it = 0; it < 64; ++it, mu_max *= 4) {
        TransverseSpectrum b = parse_transverse(spec, mu_max);
        if (static_cast<int>(b.eigenvalues.size()) >= modes) {
            b.eigenvalues.resize(modes);
            return b.eigenvalues;
        }
        if (spec.rfind("list:", 0) == 0) break;
    }
    fail_validation("transverse spectrum '" + spec + "' has fewer than " + istr(modes) + " modes");
}

ResultEnvelope halfline_table(const CampaignConfig& c) {
    ResultEnvelope env;
    env.module = "halfline";
    env.operation = "spectrum";
    env.table.columns = {"t", "ell", "mu", "k", "lambda", "residual"};
    auto mus = transverse_modes(c.transverse, c.modes, c.mu);
    WeightProfile prof = make_profile(c.profile);
    struct Item {
        size_t ti, li;
    };
    std::vector<Item> items;
    for (size_t ti = 0; ti < c.t_grid.size(); ++ti)
        for (size_t li = 0; li < mus.size(); ++li) items.push_back({ti, li});
    auto res = parallel_map<HalfLineSpectrum>(items.size(), [&](size_t i) {
        HalfLineProblem p;
        p.profile = prof;
        p.mu = mus[items[i].li];
        p.bc = c.bc;
        p.t = c.t_grid[items[i].ti];
        return solve(p, c.k_max, true);
    });
    for (size_t i = 0; i < items.size(); ++i) {
        const auto& s = res[i];
        for (auto& w : s.warnings) env.notes.push_back("t=" + fmt17(c.t_grid[items[i].ti]) + " " + w);
        for (int k = c.k_min; k <= static_cast<int>(s.eigenvalues.size()); ++k)
            env.table.add({fmt17(c.t_grid[items[i].ti]), istr(items[i].li + 1), fmt17(mus[items[i].li]), istr(k),
                           fmt17(s.eigenvalues[k - 1]), fmt17(s.residuals[k - 1])});
    }
    return env;
}

ResultEnvelope supersep_table(const CampaignConfig& c) {
    ResultEnvelope env;
    env.module = "halfline";
    env.operation = "superseparation";
    env.table.columns = {"ell", "k", "t", "lambda_k", "lambda_k1", "gap", "gap_over_t", "predicted_gap"};
    auto mus = transverse_modes(c.transverse, c.modes, c.mu);
    WeightProfile prof = make_profile(c.profile);
    struct Item {
        size_t li;
        int k;
    };
    std::vector<Item> items;
    for (size_t li = 0; li < mus.size(); ++li)
        for (int k = c.k_min; k <= c.k_max; ++k) items.push_back({li, k});
    auto res = parallel_map<SeparationReport>(items.size(), [&](size_t i) {
        HalfLineProblem p;
        p.profile = prof;
        p.mu = mus[items[i].li];
        p.bc = c.bc;
        return superseparation(p, c.t_grid, items[i].k);
    });
    env.report = json::array();
    for (size_t i = 0; i < items.size(); ++i) {
        for (auto& r : res[i].rows)
            env.table.add({istr(items[i].li + 1), istr(items[i].k), fmt17(r.t), fmt17(r.lambda_k), fmt17(r.lambda_k1),
                           fmt17(r.gap), fmt17(r.gap_over_t), fmt17(r.predicted_gap)});
        for (auto& w : res[i].warnings) env.notes.push_back(w);
        env.report.push_back({{"ell", items[i].li + 1},
                              {"k", items[i].k},
                              {"slope_fit", res[i].slope_fit},
                              {"slope_local", res[i].slope_local}});
        env.notes.push_back("ell=" + istr(items[i].li + 1) + " k=" + istr(items[i].k) +
                            " slope_fit=" + fmt17(res[i].slope_fit) + " slope_local=" + fmt17(res[i].slope_local));
    }
    return env;
}

ResultEnvelope airy_check_table(const CampaignConfig& c) {
    ResultEnvelope env;
    env.module = "halfline";
    env.operation = "airy-check";
    env.table.columns = {"t", "k", "lambda", "phi_at_zero", "airy_prediction", "defect"};
    double mu = transverse_modes(c.transverse, 1, c.mu)[0];
    WeightProfile prof = make_profile(c.profile);
    struct Item {
        size_t ti;
        int k;
    };
    std::vector<Item> items;
    for (size_t ti = 0; ti < c.t_grid.size(); ++ti)
        for (int k = c.k_min; k <= c.k_max; ++k) items.push_back({ti, k});
    auto res = parallel_map<AiryCheck>(items.size(), [&](size_t i) {
        HalfLineProblem p;
        p.profile = prof;
        p.mu = mu;
        p.bc = c.bc;
        p.t = c.t_grid[items[i].ti];
        return airy_eigenvalue_check(p, items[i].k);
    });
    for (size_t i = 0; i < items.size(); ++i)
        env.table.add({fmt17(c.t_grid[items[i].ti]), istr(items[i].k), fmt17(res[i].lambda), fmt17(res[i].phi_at_zero),
                       fmt17(res[i].airy_pred), fmt17(res[i].defect)});
    return env;
}

ResultEnvelope product_table(const CampaignConfig& c) {
    if (!(c.lambda_max > 0)) fail_validation("lambda_max must be positive");
    ResultEnvelope env;
    env.module = "separation";
    env.operation = "product_spectrum";
    env.table.columns = {"t", "lambda", "ell", "k"};
    WeightProfile prof = make_profile(c.profile);
    TransverseSpectrum b = parse_transverse(c.transverse, c.lambda_max * prof.sigma0);
    for (double t : c.t_grid) {
        LabeledSpectrum s = product_spectrum(t, prof, b, c.lambda_max, c.bc);
        for (auto& w : s.warnings) env.notes.push_back("t=" + fmt17(t) + " " + w);
        for (auto& e : s.entries) env.table.add({fmt17(t), fmt17(e.lambda), istr(e.ell), istr(e.k)});
    }
    return env;
}

ResultEnvelope quasimode_report(int n, int trials, std::uint64_t seed) {
    ResultEnvelope env;
    env.module = "forms";
    env.operation = "quasimode_campaign";
    CampaignReport r = quasimode_campaign(n, trials, seed);
    env.table.columns = {"lemma", "violations"};
    json lemmas = json::object();
    for (size_t i = 0; i < r.lemma_names.size(); ++i) {
        env.table.add({r.lemma_names[i], istr(r.lemma_violations[i])});
        lemmas[r.lemma_names[i]] = r.lemma_violations[i];
    }
    env.report = {{"n", r.n},
                  {"trials", r.trials},
                  {"seed", r.seed},
                  {"applicable", r.applicable},
                  {"violations", r.violations},
                  {"lemma_violations", lemmas},
                  {"worst_ratio", r.worst_ratio}};
    env.notes.push_back("applicable=" + istr(r.applicable) + " violations=" + istr(r.violations) +
                        " worst_ratio=" + fmt17(r.worst_ratio));
    return env;
}

ResultEnvelope compare_report(const std::vector<double>& t_grid, int n, double h) {
    ResultEnvelope env;
    env.module = "domains";
    env.operation = "compare";
    env.table.columns = {"t", "hausdorff", "hausdorff_over_t", "max_error_estimate", "finest_nodes"};
    json per_t = json::array();
    for (double t : t_grid) {
        TriangleSpectrum tr = triangle_spectrum(t, n, h);
        SectorSpectrum se = sector_spectrum(t, n);
        for (auto& note : se.notices) env.notes.push_back("t=" + fmt17(t) + " " + note);
        CompareResult cr = compare_spectra(tr.renormalized, se.renormalized, n);
        double err = 0;
        for (double e : tr.error_estimate) err = std::max(err, t * t * e);
        env.table.add({fmt17(t), fmt17(cr.hausdorff), fmt17(cr.hausdorff / t), fmt17(err), istr(tr.nodes_finest)});
        per_t.push_back({{"t", t},
                         {"hausdorff", cr.hausdorff},
                         {"hausdorff_over_t", cr.hausdorff / t},
                         {"max_error_estimate", err},
                         {"matched_diffs", cr.matched_diffs},
                         {"triangle_renormalized", tr.renormalized},
                         {"sector_renormalized", se.renormalized}});
    }
    env.report = {{"n", n}, {"h", h}, {"per_t", per_t}};
    return env;
}

json ptree_to_json(const boost::property_tree::ptree& pt) {
    if (pt.empty()) return pt.data();
    json o = json::object();
    for (auto& [k, v] : pt) o[k] = ptree_to_json(v);
    return o;
}

template <class T>
T convert(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T out;
    is >> out;
    if (!is || !(is >> std::ws).eof()) fail_validation("config: cannot read '" + key + "' from '" + v + "'");
    return out;
}

}  // namespace

CampaignConfig parse_campaign_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        fail_validation(std::string("config: ") + e.what());
    }
    auto sec = tree.get_child_optional("campaign");
    if (!sec) fail_validation("config: missing [campaign] section");
    for (auto& [name, _] : tree)
        if (name != "campaign" && name != "tolerances") fail_validation("config: unknown section [" + name + "]");

    CampaignConfig c;
    c.echo = ptree_to_json(tree);
    for (auto& [key, node] : *sec) {
        const std::string& v = node.data();
        if (key == "kind") c.kind = v;
        else if (key == "profile") c.profile = v;
        else if (key == "transverse") c.transverse = v;
        else if (key == "t_grid") c.t_grid = parse_grid(v);
        else if (key == "bc") c.bc = parse_boundary(v);
        else if (key == "k_min") c.k_min = convert<int>(key, v);
        else if (key == "k_max") c.k_max = convert<int>(key, v);
        else if (key == "modes") c.modes = convert<int>(key, v);
        else if (key == "mu") c.mu = convert<double>(key, v);
        else if (key == "lambda_max") c.lambda_max = convert<double>(key, v);
        else if (key == "h") c.h = convert<double>(key, v);
        else if (key == "n") c.n = convert<int>(key, v);
        else if (key == "trials") c.trials = convert<int>(key, v);
        else if (key == "seed") c.seed = convert<std::uint64_t>(key, v);
        else if (key == "output") c.output = v;
        else if (key == "json") c.json_output = v;
        else fail_validation("config: unknown key '" + key + "' in [campaign]");
    }
    if (auto tol = tree.get_child_optional("tolerances"))
        for (auto& [key, node] : *tol) c.tolerances[key] = convert<double>(key, node.data());
    validate(c);
    return c;
}

CampaignConfig read_campaign_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail_validation("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_campaign_config(ss.str());
}

void validate(const CampaignConfig& c) {
    static const std::vector<std::string> kinds{"halfline", "supersep", "airy-check", "product", "quasimode", "compare"};
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
        fail_validation("config: kind must be one of halfline, supersep, airy-check, product, quasimode, compare");
    if (c.kind == "quasimode") {
        if (!c.seed) fail_validation("config: randomized campaign needs an explicit seed");
        if (c.n < 1 || c.trials < 1) fail_validation("config: n and trials must be positive");
        return;
    }
    if (c.t_grid.empty()) fail_validation("config: t_grid is required");
    check_decreasing(c.t_grid, "config: t_grid");
    if (c.k_min < 1 || c.k_max < c.k_min) fail_validation("config: need 1 <= k_min <= k_max");
    if (c.kind == "supersep" && c.t_grid.size() < 2) fail_validation("config: supersep needs at least two t values");
    if (c.kind == "compare" && (c.n < 1 || !(c.h > 0))) fail_validation("config: compare needs n >= 1 and h > 0");
    for (auto& [k, v] : c.tolerances)
        if (!(v >= 0)) fail_validation("config: tolerance for '" + k + "' must be non-negative");
}

ResultEnvelope run_campaign(const CampaignConfig& c) {
    validate(c);
    ResultEnvelope env;
    if (c.kind == "halfline") env = halfline_table(c);
    else if (c.kind == "supersep") env = supersep_table(c);
    else if (c.kind == "airy-check") env = airy_check_table(c);
    else if (c.kind == "product") env = product_table(c);
    else if (c.kind == "quasimode") env = quasimode_report(c.n, c.trials, *c.seed);
    else env = compare_report(c.t_grid, c.n, c.h);
    env.config = c.echo;
    return env;
}

namespace {

enum class Emit { Default, Csv, Json };

struct Emitter {
    std::ostream& out;
    Emit emit = Emit::Default;
    std::string out_path;

    void write(const ResultEnvelope& env, bool json_default, const std::string& path) const {
        bool as_json = emit == Emit::Json || (emit == Emit::Default && json_default);
        auto put = [&](std::ostream& os) { as_json ? write_json(env, os) : write_csv(env, os); };
        if (path.empty()) {
            put(out);
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) fail_validation("cannot write " + path);
        put(f);
        if (!f) fail_validation("write failed: " + path);
    }
    void write(const ResultEnvelope& env, bool json_default) const { write(env, json_default, out_path); }
};

void check_positive(double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) fail_validation(std::string(name) + " must be positive");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectra of degenerating quadratic-form families", "specdegen"};
    app.set_help_flag("--help", "print help");
    app.fallthrough();
    app.require_subcommand(1);
    std::string emit_s = "default", out_path;
    app.add_option("--emit", emit_s, "csv or json (default depends on the command)")
        ->check(CLI::IsMember({"default", "csv", "json"}));
    app.add_option("--out", out_path, "output file (default: standard output)");
    app.set_version_flag("--version", std::string(tool_version));

    std::function<int(const Emitter&)> action;
    auto leaf = [&](CLI::App* sub, std::function<int(const Emitter&)> fn) {
        sub->callback([&action, fn] { action = fn; });
    };

    // airy
    auto* airy = app.add_subcommand("airy", "Airy functions, zeros, model operator, kernel");
    airy->require_subcommand(1);
    auto* zeros = airy->add_subcommand("zeros", "zeros of A- (dirichlet) or A-' (neumann)");
    int zn = 0;
    std::string zkind = "dirichlet";
    zeros->add_option("--n", zn, "how many")->required();
    zeros->add_option("--kind", zkind, "dirichlet|neumann");
    leaf(zeros, [&](const Emitter& em) {
        if (zn < 1) fail_validation("--n must be >= 1");
        Boundary b = parse_boundary(zkind);
        ResultEnvelope env;
        env.module = "airy";
        env.operation = "zeros";
        env.config = {{"n", zn}, {"kind", to_string(b)}};
        env.table.columns = {"k", "zero"};
        auto z = airy_zeros(zn, b);
        for (int k = 0; k < zn; ++k) env.table.add({istr(k + 1), fmt17(z[k])});
        em.write(env, false);
        return 0;
    });

    auto* ev = airy->add_subcommand("eval", "A-, A-', A+, A+' on a list of points");
    std::string u;
    ev->add_option("--u", u, "comma separated points")->required();
    leaf(ev, [&](const Emitter& em) {
        auto us = parse_grid(u);
        ResultEnvelope env;
        env.module = "airy";
        env.operation = "eval";
        env.config = {{"u", us}};
        env.table.columns = {"u", "A_minus", "dA_minus", "A_plus", "dA_plus"};
        for (double x : us) {
            if (!(std::abs(x) <= 200)) fail_validation("airy eval: |u| <= 200");
            AiryValues a = airy_eval(x);
            env.table.add({fmt17(x), fmt17(a.am), fmt17(a.dam), fmt17(a.ap), fmt17(a.dap)});
        }
        em.write(env, false);
        return 0;
    });

    auto* model = airy->add_subcommand("model", "eigenvalues of -d^2/du^2 + u on [z, inf)");
    double z = 0;
    int mn = 0;
    std::string mkind = "dirichlet";
    model->add_option("--z", z, "left end")->required();
    model->add_option("--n", mn, "how many")->required();
    model->add_option("--kind", mkind, "dirichlet|neumann");
    leaf(model, [&](const Emitter& em) {
        if (mn < 1) fail_validation("--n must be >= 1");
        Boundary b = parse_boundary(mkind);
        ResultEnvelope env;
        env.module = "airy";
        env.operation = "model_operator";
        env.config = {{"z", z}, {"n", mn}, {"kind", to_string(b)}};
        env.table.columns = {"k", "eigenvalue"};
        auto ev = model_operator_eigs(z, b, mn);
        for (size_t k = 0; k < ev.size(); ++k) env.table.add({istr(k + 1), fmt17(ev[k])});
        em.write(env, false);
        return 0;
    });

    auto* ker = airy->add_subcommand("kernel", "solve t^2 W'' - y W = g with g = 1 through the kernel");
    double kt = 1, ka = -2, kb = 2, kh = 1e-2;
    ker->add_option("--t", kt);
    ker->add_option("--a", ka);
    ker->add_option("--b", kb);
    ker->add_option("--h", kh);
    leaf(ker, [&](const Emitter& em) {
        check_positive(kt, "--t");
        check_positive(kh, "--h");
        if (!(ka < 0 && kb > 0)) fail_validation("kernel: need a < 0 < b");
        int nl = static_cast<int>(std::lround(-ka / kh)), nr = static_cast<int>(std::lround(kb / kh));
        if (nl + nr > 200000) fail_validation("kernel: grid too large");
        std::vector<double> y, g;
        for (int i = -nl; i <= nr; ++i) {
            y.push_back(i * kh);
            g.push_back(1.0);
        }
        KernelSolution s = kernel_solve(y, g, kt);
        ResultEnvelope env;
        env.module = "airy";
        env.operation = "kernel_solve";
        env.config = {{"t", kt}, {"a", ka}, {"b", kb}, {"h", kh}, {"g", "1"}};
        env.notes.push_back("residual=" + fmt17(s.residual));
        env.table.columns = {"y", "W"};
        for (size_t i = 0; i < s.y.size(); ++i) env.table.add({fmt17(s.y[i]), fmt17(s.W[i])});
        env.report = {{"residual", s.residual}};
        em.write(env, false);
        return 0;
    });

    // halfline
    auto* half = app.add_subcommand("halfline", "weighted half-line eigenproblems");
    half->require_subcommand(1);
    CampaignConfig hc;
    std::string h_bc = "dirichlet", h_grid;
    double h_mu = 0;
    auto common_half = [&](CLI::App* s, bool grid) {
        s->add_option("--profile", hc.profile, "exp2 | exp | rational | expr:<sigma(x)> | stretch:<rho(x)>");
        s->add_option("--mu", h_mu, "transverse eigenvalue")->required();
        s->add_option("--bc", h_bc, "dirichlet|neumann");
        s->add_option(grid ? "--t-grid" : "--t", h_grid, grid ? "decreasing t values" : "t")->required();
    };
    auto half_config = [&](const char* kind) {
        CampaignConfig c = hc;
        c.kind = kind;
        c.mu = h_mu;
        c.bc = parse_boundary(h_bc);
        c.t_grid = parse_grid(h_grid);
        c.echo = {{"profile", c.profile}, {"mu", h_mu}, {"bc", to_string(c.bc)}, {"t_grid", c.t_grid},
                  {"k_min", c.k_min},     {"k_max", c.k_max}};
        return c;
    };
    auto* sp = half->add_subcommand("spectrum", "lowest k eigenvalues at each t");
    common_half(sp, false);
    sp->add_option("--k", hc.k_max, "how many")->required();
    leaf(sp, [&](const Emitter& em) {
        CampaignConfig c = half_config("halfline");
        em.write(run_campaign(c), false);
        return 0;
    });
    auto* ss = half->add_subcommand("supersep", "gap between eigenvalues k and k+1 over a t grid");
    common_half(ss, true);
    ss->add_option("--k", hc.k_min, "index k")->required();
    leaf(ss, [&](const Emitter& em) {
        hc.k_max = hc.k_min;
        CampaignConfig c = half_config("supersep");
        em.write(run_campaign(c), false);
        return 0;
    });
    auto* ac = half->add_subcommand("airy-check", "phi_lambda(0) against t^(2/3) a_k");
    common_half(ac, true);
    ac->add_option("--k", hc.k_max, "largest k")->required();
    leaf(ac, [&](const Emitter& em) {
        CampaignConfig c = half_config("airy-check");
        em.write(run_campaign(c), false);
        return 0;
    });

    // product
    auto* prod = app.add_subcommand("product", "separation of variables");
    prod->require_subcommand(1);
    auto* psp = prod->add_subcommand("spectrum", "labeled product spectrum below lambda_max");
    std::string profile = "exp2", transverse = "dirichlet-interval:L=1", bc = "dirichlet", grid;
    double lmax = 0;
    transverse = "dirichlet-interval:L=1";
    psp->add_option("--profile", profile);
    psp->add_option("--transverse", transverse, "dirichlet-interval:L=<len> | list:a,b,...");
    psp->add_option("--bc", bc);
    psp->add_option("--t-grid,--t", grid)->required();
    psp->add_option("--lambda-max", lmax)->required();
    leaf(psp, [&](const Emitter& em) {
        CampaignConfig c;
        c.kind = "product";
        c.profile = profile;
        c.transverse = transverse;
        c.bc = parse_boundary(bc);
        c.t_grid = parse_grid(grid);
        c.lambda_max = lmax;
        c.echo = {{"profile", profile}, {"transverse", transverse}, {"bc", to_string(c.bc)},
                  {"t_grid", c.t_grid}, {"lambda_max", lmax}};
        em.write(run_campaign(c), false);
        return 0;
    });

    auto* scan = prod->add_subcommand("scan", "multiplicity and crossing scan over a t grid");
    double tol = 1e-8;
    scan->add_option("--profile", profile);
    scan->add_option("--transverse", transverse);
    scan->add_option("--bc", bc);
    scan->add_option("--t-grid", grid)->required();
    scan->add_option("--lambda-max", lmax)->required();
    scan->add_option("--tol", tol);
    leaf(scan, [&](const Emitter& em) {
        auto ts = parse_grid(grid);
        check_decreasing(ts, "--t-grid");
        check_positive(lmax, "--lambda-max");
        if (!(tol >= 0)) fail_validation("--tol must be non-negative");
        WeightProfile prof = make_profile(profile);
        TransverseSpectrum b = parse_transverse(transverse, lmax * prof.sigma0);
        Boundary bcv = parse_boundary(bc);
        std::vector<LabeledSpectrum> spectra;
        for (auto it = ts.rbegin(); it != ts.rend(); ++it) spectra.push_back(product_spectrum(*it, prof, b, lmax, bcv));
        SimplicityReport r = simplicity_scan(spectra, tol);
        ResultEnvelope env;
        env.module = "separation";
        env.operation = "simplicity_scan";
        env.config = {{"profile", profile}, {"transverse", transverse}, {"bc", to_string(bcv)},
                      {"t_grid", ts},       {"lambda_max", lmax},       {"tol", tol}};
        env.table.columns = {"t", "count", "min_gap"};
        for (size_t i = 0; i < r.t.size(); ++i)
            env.table.add({fmt17(r.t[i]), istr(spectra[i].entries.size()), fmt17(r.min_gap[i])});
        json sus = json::array(), cr = json::array();
        for (auto& s : r.suspects)
            sus.push_back({{"t", s.t}, {"a", {s.a.lambda, s.a.ell, s.a.k}}, {"b", {s.b.lambda, s.b.ell, s.b.k}},
                           {"gap", s.gap}});
        for (auto& c : r.crossings)
            cr.push_back({{"t_lo", c.t_lo}, {"t_hi", c.t_hi}, {"a", {c.ell_a, c.k_a}}, {"b", {c.ell_b, c.k_b}}});
        env.report = {{"suspects", sus}, {"crossings", cr}};
        em.write(env, true);
        return 0;
    });

    auto* cyl = prod->add_subcommand("cylinder", "levels pi^2 (k^2 + l^2/t^2) with multiplicities");
    double ct = 1;
    int cn = 0;
    cyl->add_option("--t", ct)->required();
    cyl->add_option("--n", cn, "number of distinct levels")->required();
    leaf(cyl, [&](const Emitter& em) {
        check_positive(ct, "--t");
        if (cn < 1) fail_validation("--n must be >= 1");
        CylinderSpectrum cs = cylinder_spectrum(ct, cn);
        ResultEnvelope env;
        env.module = "separation";
        env.operation = "cylinder_spectrum";
        env.config = {{"t", ct}, {"n", cn}};
        env.notes.push_back(std::string("grouping=") + (cs.exact ? "exact" : "relative"));
        env.table.columns = {"level", "lambda", "multiplicity", "modes"};
        for (size_t i = 0; i < cs.levels.size(); ++i) {
            std::string modes;
            for (auto& [k, l] : cs.levels[i].modes) modes += (modes.empty() ? "" : " ") + istr(k) + ":" + istr(l);
            env.table.add({istr(i + 1), fmt17(cs.levels[i].lambda), istr(cs.levels[i].multiplicity), modes});
        }
        em.write(env, false);
        return 0;
    });

    auto* thr = prod->add_subcommand("threshold", "largest t with the first n cylinder eigenvalues simple");
    int nmax = 10;
    thr->add_option("--n-max", nmax);
    leaf(thr, [&](const Emitter& em) {
        if (nmax < 2) fail_validation("--n-max must be >= 2");
        auto rows = parallel_map<CylinderThreshold>(nmax - 1, [&](size_t i) {
            return cylinder_simplicity_threshold(static_cast<int>(i) + 2);
        });
        ResultEnvelope env;
        env.module = "separation";
        env.operation = "cylinder_threshold";
        env.config = {{"n_max", nmax}};
        env.table.columns = {"n", "enumerated", "inverse_sqrt", "inverse", "matches_inverse_sqrt", "matches_inverse"};
        for (auto& r : rows)
            env.table.add({istr(r.n), fmt17(r.enumerated), fmt17(r.inverse_sqrt), fmt17(r.inverse),
                           r.matches_inverse_sqrt ? "true" : "false", r.matches_inverse ? "true" : "false"});
        em.write(env, false);
        return 0;
    });

    // forms
    auto* forms = app.add_subcommand("forms", "finite-dimensional form pencils");
    forms->require_subcommand(1);
    auto* camp = forms->add_subcommand("campaign", "seeded random quasimode lemma campaign");
    int fdim = 6, trials = 1000;
    std::optional<std::uint64_t> seed;
    camp->add_option("--n", fdim);
    camp->add_option("--trials", trials);
    camp->add_option("--seed", seed)->required();
    leaf(camp, [&](const Emitter& em) {
        if (fdim < 1 || trials < 1) fail_validation("--n and --trials must be positive");
        ResultEnvelope env = quasimode_report(fdim, trials, *seed);
        env.config = {{"n", fdim}, {"trials", trials}, {"seed", *seed}};
        em.write(env, true);
        return 0;
    });

    auto* tr = forms->add_subcommand("track", "analytic branches of a piecewise-linear ffile file");
    std::string ffile, fgrid;
    int nb = -1;
    tr->add_option("--family", ffile)->required();
    tr->add_option("--t-grid", fgrid)->required();
    tr->add_option("--branches", nb);
    leaf(tr, [&](const Emitter& em) {
        PencilFamily fam = read_family(ffile);
        auto ts = parse_grid(fgrid);
        for (size_t i = 1; i < ts.size(); ++i)
            if (!(ts[i] > ts[i - 1])) fail_validation("--t-grid must be strictly increasing");
        TrackOptions opt;
        opt.n_branches = nb;
        auto br = track_branches(fam, ts, opt);
        ResultEnvelope env;
        env.module = "forms";
        env.operation = "track_branches";
        env.config = {{"family", ffile}, {"t_grid", ts}, {"branches", nb}};
        env.table.columns = {"branch", "t", "value"};
        for (size_t b = 0; b < br.size(); ++b) {
            for (size_t i = 0; i < br[b].t_grid.size(); ++i)
                env.table.add({istr(b + 1), fmt17(br[b].t_grid[i]), fmt17(br[b].values[i])});
            for (int c : br[b].crossings)
                env.notes.push_back("branch " + istr(b + 1) + " changes rank in (" + fmt17(br[b].t_grid[c]) + ", " +
                                    fmt17(br[b].t_grid[c + 1]) + ")");
            for (int c : br[b].uncertain)
                env.notes.push_back("branch " + istr(b + 1) + " matching uncertain in (" + fmt17(br[b].t_grid[c]) +
                                    ", " + fmt17(br[b].t_grid[c + 1]) + ")");
        }
        em.write(env, false);
        return 0;
    });

    auto* var = forms->add_subcommand("variational", "finite-difference eigenvalue derivative against the form");
    double vt = 0, dt = 1e-3;
    int index = 0;
    var->add_option("--family", ffile)->required();
    var->add_option("--t", vt)->required();
    var->add_option("--index", index, "0-based sorted index");
    var->add_option("--dt", dt);
    leaf(var, [&](const Emitter& em) {
        check_positive(dt, "--dt");
        if (index < 0) fail_validation("--index must be >= 0");
        PencilFamily fam = read_family(ffile);
        ResultEnvelope env;
        env.module = "forms";
        env.operation = "variational_check";
        env.config = {{"family", ffile}, {"t", vt}, {"index", index}, {"dt", dt}};
        env.table.columns = {"dt", "fd_derivative", "form_derivative", "difference"};
        for (double d : {dt, dt / 2, dt / 4}) {
            VariationalCheck v = variational_check(fam, vt, index, d);
            env.table.add({fmt17(d), fmt17(v.fd_derivative), fmt17(v.form_derivative), fmt17(v.difference)});
        }
        em.write(env, false);
        return 0;
    });

    // domain
    auto* dom = app.add_subcommand("domain", "triangle, sector and mesh tools");
    dom->require_subcommand(1);
    double dt_ = 0, h = 0.01;
    int dn = 10, N = 0;
    std::string dgrid, vpath, epath;

    auto* tri = dom->add_subcommand("triangle", "P1 FEM eigenvalues on h, h/2, h/4 with Richardson extrapolation");
    tri->add_option("--t", dt_)->required();
    tri->add_option("--n", dn);
    tri->add_option("--h", h);
    leaf(tri, [&](const Emitter& em) {
        if (dn < 1) fail_validation("--n must be >= 1");
        TriangleSpectrum r = triangle_spectrum(dt_, dn, h);
        ResultEnvelope env;
        env.module = "domains";
        env.operation = "triangle_spectrum";
        env.config = {{"t", dt_}, {"n", dn}, {"h", h}};
        env.notes.push_back("finest_nodes=" + istr(r.nodes_finest));
        env.table.columns = {"k", "lambda_h", "lambda_h2", "lambda_h4", "lambda_extrap", "error_estimate", "renormalized"};
        for (int k = 0; k < dn; ++k)
            env.table.add({istr(k + 1), fmt17(r.lambda_h[k]), fmt17(r.lambda_h2[k]), fmt17(r.lambda_h4[k]),
                           fmt17(r.lambda_extrap[k]), fmt17(r.error_estimate[k]), fmt17(r.renormalized[k])});
        em.write(env, false);
        return 0;
    });

    auto* sec = dom->add_subcommand("sector", "Dirichlet spectrum of the sector of opening arctan t via Bessel zeros");
    sec->add_option("--t", dt_)->required();
    sec->add_option("--n", dn);
    leaf(sec, [&](const Emitter& em) {
        if (dn < 1) fail_validation("--n must be >= 1");
        SectorSpectrum s = sector_spectrum(dt_, dn);
        ResultEnvelope env;
        env.module = "domains";
        env.operation = "sector_spectrum";
        env.config = {{"t", dt_}, {"n", dn}};
        env.notes = s.notices;
        env.table.columns = {"index", "ell", "k", "lambda", "renormalized"};
        for (size_t i = 0; i < s.spectrum.entries.size(); ++i) {
            auto& e = s.spectrum.entries[i];
            env.table.add({istr(i + 1), istr(e.ell), istr(e.k), fmt17(e.lambda), fmt17(s.renormalized[i])});
        }
        em.write(env, false);
        return 0;
    });

    auto* cmp = dom->add_subcommand("compare", "Hausdorff distance of renormalized triangle and sector spectra");
    cmp->add_option("--t-grid", dgrid)->required();
    cmp->add_option("--n", dn);
    cmp->add_option("--h", h);
    leaf(cmp, [&](const Emitter& em) {
        auto ts = parse_grid(dgrid);
        check_decreasing(ts, "--t-grid");
        if (dn < 1) fail_validation("--n must be >= 1");
        ResultEnvelope env = compare_report(ts, dn, h);
        env.config = {{"t_grid", ts}, {"n", dn}, {"h", h}};
        em.write(env, true);
        return 0;
    });

    auto* mesh = dom->add_subcommand("mesh", "write the structured triangle mesh as vertex and element CSV");
    mesh->add_option("--t", dt_)->required();
    mesh->add_option("--N", N, "elements along the base")->required();
    mesh->add_option("--vertices", vpath)->required();
    mesh->add_option("--elements", epath)->required();
    leaf(mesh, [&](const Emitter& em) {
        if (N < 1 || N > 4000) fail_validation("--N must be in [1, 4000]");
        TriangleMesh m = triangle_mesh(dt_, N);
        json cfg = {{"t", dt_}, {"N", N}};
        ResultEnvelope v, e;
        v.module = e.module = "domains";
        v.operation = "mesh_vertices";
        e.operation = "mesh_elements";
        v.config = e.config = cfg;
        v.table.columns = {"id", "x", "y", "boundary"};
        for (size_t i = 0; i < m.x.size(); ++i)
            v.table.add({istr(i), fmt17(m.x[i]), fmt17(m.y[i]), istr(m.boundary[i])});
        e.table.columns = {"id", "v0", "v1", "v2"};
        for (size_t i = 0; i < m.elements.size(); ++i)
            e.table.add({istr(i), istr(m.elements[i][0]), istr(m.elements[i][1]), istr(m.elements[i][2])});
        Emitter csv{em.out, Emit::Csv, ""};
        csv.write(v, false, vpath);
        csv.write(e, false, epath);
        ResultEnvelope s;
        s.module = "domains";
        s.operation = "mesh";
        s.config = cfg;
        s.report = {{"vertices", m.x.size()}, {"elements", m.elements.size()}, {"h", m.h()},
                    {"min_area", m.min_area()}, {"quality_ratio", m.quality_ratio()}};
        em.write(s, true);
        return 0;
    });

    // campaign
    auto* cmpg = app.add_subcommand("campaign", "config-driven sweep");
    std::string cfg_path;
    cmpg->add_option("--config", cfg_path)->required();
    leaf(cmpg, [&](const Emitter& em) {
        CampaignConfig c = read_campaign_config(cfg_path);
        ResultEnvelope env = run_campaign(c);
        bool json_default = c.kind == "quasimode" || c.kind == "compare";
        if (!em.out_path.empty() || c.output.empty()) em.write(env, json_default);
        else em.write(env, json_default, c.output);
        if (!c.json_output.empty()) {
            Emitter js{em.out, Emit::Json, ""};
            js.write(env, true, c.json_output);
        }
        return 0;
    });

    // golden
    auto* gold = app.add_subcommand("golden", "compare a produced CSV with a golden file");
    std::string gpath, rpath, gcfg;
    std::vector<std::string> overrides;
    double grel = 1e-9;
    gold->add_option("--golden", gpath)->required();
    gold->add_option("--result", rpath)->required();
    gold->add_option("--config", gcfg, "campaign config whose [tolerances] apply");
    gold->add_option("--tol", overrides, "column=relative tolerance, overrides the config");
    gold->add_option("--rel", grel, "default relative tolerance");
    leaf(gold, [&](const Emitter& em) {
        std::map<std::string, double> tol;
        if (!gcfg.empty()) tol = read_campaign_config(gcfg).tolerances;
        for (auto& o : overrides) {
            size_t eq = o.find('=');
            if (eq == std::string::npos || eq == 0) fail_validation("--tol expects column=value, got '" + o + "'");
            auto v = parse_grid(o.substr(eq + 1));
            if (v.size() != 1 || !(v[0] >= 0)) fail_validation("--tol value must be one non-negative number");
            tol[o.substr(0, eq)] = v[0];
        }
        if (!(grel >= 0)) fail_validation("--rel must be non-negative");
        CsvData produced = read_csv_file(rpath);
        GoldenReport r = golden_check(gpath, produced, tol, grel);
        em.out << (r.pass ? "PASS " : "FAIL ") << gpath << '\n';
        for (auto& m : r.messages) em.out << "  " << m << '\n';
        return r.pass ? 0 : 1;
    });

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    Emitter em{out, emit_s == "csv" ? Emit::Csv : emit_s == "json" ? Emit::Json : Emit::Default, out_path};
    try {
        if (!action) throw ValidationError("no command given");
        return action(em);
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const ResolutionError& e) {
        err << "resolution refused: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace specdegen
