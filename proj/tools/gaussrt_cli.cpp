// Command-line front end over the CmDocument JSON format: state generation,
// resource quantification, witness emission, channel application, and the
// experiment harness.
//
// Exit codes: 0 success, 2 input validation, 3 solver failure, 4 harness
// assertion failure. All numeric text output carries 9 significant digits.
// GAUSSRT_TOL overrides the default decision tolerances.

#include <gaussrt/io.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace gaussrt;

namespace {

double env_tol(double fallback) {
    if (const char* raw = std::getenv("GAUSSRT_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(raw, &end);
        if (end != raw && v > 0.0) return v;
        throw std::invalid_argument("GAUSSRT_TOL must be a positive number, got '" +
                                    std::string(raw) + "'");
    }
    return fallback;
}

void emit_document(const GaussianState& st, const std::string& out) {
    if (out.empty())
        std::cout << cm_document(st).dump(2) << "\n";
    else
        write_cm_document(out, st);
}

GaussianState load_state(const std::string& path, const std::string& partition_flag) {
    GaussianState st = read_cm_document(path);
    if (!partition_flag.empty()) {
        // Flag overrides the document: colon-separated party labels, one per
        // mode ("A:B" puts the first mode with A, the second with B).
        std::vector<std::string> labels;
        std::string seg;
        std::istringstream in(partition_flag);
        while (std::getline(in, seg, ':')) labels.push_back(seg);
        if (static_cast<int>(labels.size()) != st.modes())
            throw std::invalid_argument("--partition must list one label per mode (" +
                                        std::to_string(st.modes()) + " modes, got " +
                                        std::to_string(labels.size()) + ")");
        st.partition = ModePartition(labels);
    }
    return st;
}

nlohmann::json matrix_json(const CMat& M) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (int r = 0; r < M.rows(); ++r) {
        nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
        for (int c = 0; c < M.cols(); ++c) {
            rr.push_back(M(r, c).real());
            ri.push_back(M(r, c).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    return {{"re", std::move(re)}, {"im", std::move(im)}};
}

void print_matrix(const std::string& name, const CMat& M) {
    const bool complex = M.imag().cwiseAbs().maxCoeff() > 0.0;
    std::cout << name << ":\n";
    for (int r = 0; r < M.rows(); ++r) {
        std::cout << " ";
        for (int c = 0; c < M.cols(); ++c) {
            std::cout << " " << fmt_sig(M(r, c).real());
            if (complex) std::cout << (M(r, c).imag() < 0 ? "-" : "+")
                                   << fmt_sig(std::abs(M(r, c).imag())) << "i";
        }
        std::cout << "\n";
    }
}

struct KappaFlags {
    std::string input, partition, method = "automatic", party_a = "A", party_b = "B";
    std::string theory;
    bool json = false;
};

int cmd_kappa(const KappaFlags& f) {
    const GaussianState st = load_state(f.input, f.partition);
    const Theory theory = theory_from_string(f.theory);
    const auto spec = cone_spec(theory, st.partition, f.party_a, f.party_b);
    KappaOptions opt;
    opt.member_tol = env_tol(opt.member_tol);

    if (f.method == "both") {
        KappaOptions oa = opt, os = opt;
        oa.method = QuantMethod::analytic;
        os.method = QuantMethod::sdp;
        const ResourceReport a = kappa(st.V, spec, oa);
        const ResourceReport s = kappa(st.V, spec, os);
        const double agreement = std::abs(a.kappa - s.kappa);
        if (f.json) {
            nlohmann::json j = {{"theory", to_string(theory)},
                                {"kappa_analytic", a.kappa},
                                {"kappa_sdp", s.kappa},
                                {"agreement", agreement},
                                {"kappa", a.kappa},
                                {"upsilon", s.upsilon},
                                {"member", a.member}};
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "theory: " << to_string(theory) << "\n"
                      << "kappa_analytic: " << fmt_sig(a.kappa) << "\n"
                      << "kappa_sdp: " << fmt_sig(s.kappa) << "\n"
                      << "agreement: " << fmt_sig(agreement) << "\n"
                      << "member: " << (a.member ? "true" : "false") << "\n";
        }
        return 0;
    }

    KappaOptions one = opt;
    if (f.method == "analytic") one.method = QuantMethod::analytic;
    else if (f.method == "sdp") one.method = QuantMethod::sdp;
    else if (f.method == "bisect") one.method = QuantMethod::bisect;
    else if (f.method != "automatic")
        throw std::invalid_argument("--method must be automatic, analytic, sdp, bisect or both");
    const ResourceReport rep = kappa(st.V, spec, one);
    if (f.json) {
        nlohmann::json j = {{"theory", to_string(theory)}, {"kappa", rep.kappa},
                            {"upsilon", rep.upsilon},      {"member", rep.member},
                            {"method", rep.method},        {"gap", rep.gap}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "theory: " << to_string(theory) << "\n"
                  << "kappa: " << fmt_sig(rep.kappa) << "\n"
                  << "upsilon: " << fmt_sig(rep.upsilon) << "\n"
                  << "member: " << (rep.member ? "true" : "false") << "\n"
                  << "method: " << rep.method << "\n";
    }
    return 0;
}

int cmd_witness(const KappaFlags& f) {
    const GaussianState st = load_state(f.input, f.partition);
    const Theory theory = theory_from_string(f.theory);
    const auto spec = cone_spec(theory, st.partition, f.party_a, f.party_b);
    const UpsilonReport rep = upsilon(st.V, spec);

    // Re-evaluate the dual identities from the emitted matrices rather than
    // trusting the solver's bookkeeping.
    const CMat Vc = st.V.cast<std::complex<double>>();
    const double value = hs_pair(rep.W, Vc);
    double norm = hs_pair(rep.W, spec.C);
    if (rep.Y.size() > 0) norm += hs_pair(rep.Y, spec.D);
    const double norm_tol = env_tol(1e-7);
    const bool norm_ok = std::abs(norm - 1.0) <= norm_tol;
    const bool violation = value < 1.0;

    if (f.json) {
        nlohmann::json j = {{"theory", to_string(theory)},
                            {"witness_value", value},
                            {"normalization", norm},
                            {"normalization_ok", norm_ok},
                            {"violation", violation},
                            {"upsilon", rep.upsilon},
                            {"W", matrix_json(rep.W)}};
        if (rep.Y.size() > 0) j["Y"] = matrix_json(rep.Y);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "theory: " << to_string(theory) << "\n"
                  << "witness_value: " << fmt_sig(value) << "\n"
                  << "verdict: "
                  << (violation ? "violation certified, state is outside the free cone"
                                : "no violation, witness value >= 1")
                  << "\n"
                  << "normalization: " << fmt_sig(norm) << " (" << (norm_ok ? "ok" : "BROKEN")
                  << " within " << fmt_sig(norm_tol) << ")\n";
        print_matrix("W", rep.W);
        if (rep.Y.size() > 0) print_matrix("Y", rep.Y);
    }
    if (!norm_ok)
        throw std::runtime_error("witness normalization identity failed: " + fmt_sig(norm));
    return 0;
}

struct ChannelFlags {
    std::string input, out;
    double eta = 0.5, nbar = 0.0, theta = 0.785398163397448, sigma2 = 1.0;
    int mode_i = 0, mode_j = 1;
};

int cmd_channel(const std::string& kind, const ChannelFlags& f) {
    GaussianState st = read_cm_document(f.input);
    GaussianChannel ch;
    if (kind == "loss")
        ch = make_loss(f.eta, f.nbar, st.modes(), &st.partition);
    else if (kind == "bs")
        ch = make_beam_splitter(f.theta, f.mode_i, f.mode_j, st.modes(), &st.partition);
    else if (kind == "noise")
        ch = make_random_displacement(
            NoiseKernel(Mat(f.sigma2 * Mat::Identity(2 * st.modes(), 2 * st.modes()))),
            &st.partition);
    else
        throw std::invalid_argument("unknown channel kind '" + kind + "'");
    emit_document(apply_channel(ch, st), f.out);
    return 0;
}

struct HarnessFlags {
    std::string suite = "all", theory = "all", config, out;
};

int cmd_harness(const HarnessFlags& f) {
    ExperimentConfig base;
    base.tol = env_tol(base.tol);
    double nogo_source = 0.3, nogo_target = 0.8;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw std::invalid_argument("cannot open config '" + f.config + "'");
        nlohmann::json cfg;
        try {
            in >> cfg;
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
        }
        if (cfg.contains("seed")) base.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("n_random")) base.n_random = cfg["n_random"].get<int>();
        if (cfg.contains("tol")) base.tol = cfg["tol"].get<double>();
        if (cfg.contains("copies")) base.copies = cfg["copies"].get<int>();
        if (cfg.contains("r_grid")) base.r_grid = cfg["r_grid"].get<std::vector<double>>();
        if (cfg.contains("nogo_r_source")) nogo_source = cfg["nogo_r_source"].get<double>();
        if (cfg.contains("nogo_r_target")) nogo_target = cfg["nogo_r_target"].get<double>();
    }

    std::vector<Theory> theories;
    if (f.theory == "all")
        theories = {Theory::nonclassicality, Theory::ppt, Theory::steering,
                    Theory::separability};
    else
        theories = {theory_from_string(f.theory)};

    std::vector<std::string> suites;
    if (f.suite == "all")
        suites = {"tensorization", "nogo", "monotonicity"};
    else if (f.suite == "tensorization" || f.suite == "nogo" || f.suite == "monotonicity")
        suites = {f.suite};
    else
        throw std::invalid_argument("unknown suite '" + f.suite +
                                    "' (tensorization, nogo, monotonicity, all)");

    nlohmann::json reports = nlohmann::json::array();
    bool all_passed = true;
    for (Theory th : theories) {
        ExperimentConfig cfg = base;
        cfg.theory = th;
        for (const std::string& suite : suites) {
            SuiteReport rep;
            if (suite == "tensorization") {
                rep = run_tensorization(cfg);
            } else if (suite == "monotonicity") {
                rep = run_monotonicity(cfg);
            } else {
                const bool single = th == Theory::nonclassicality;
                const Mat V = single ? make_squeezed(nogo_source).V : make_tmsv(nogo_source).V;
                const Mat W = single ? make_squeezed(nogo_target).V : make_tmsv(nogo_target).V;
                const ModePartition part =
                    single ? ModePartition::uniform(1) : ModePartition::bipartition(1, 1);
                rep = run_nogo(V, W, part, cfg);
            }
            all_passed = all_passed && rep.passed;
            std::cout << "[" << rep.experiment << "/" << rep.theory << "] "
                      << (rep.passed ? "PASS" : "FAIL") << " (" << rep.cases.size()
                      << " cases): " << rep.conclusion << "\n";
            reports.push_back(to_json(rep));
        }
    }

    if (!f.out.empty()) {
        std::ofstream out(f.out);
        if (!out) throw std::invalid_argument("cannot write report '" + f.out + "'");
        out << reports.dump(2) << "\n";
        std::cout << "report written to " << f.out << "\n";
    } else {
        std::cout << reports.dump(2) << "\n";
    }
    return all_passed ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian resource toolkit: covariance-matrix level quantifiers, witnesses, "
                 "channels, and experiment suites"};
    app.require_subcommand(1);
    int exit_code = 0;

    // gen
    auto* gen = app.add_subcommand("gen", "generate a state document");
    gen->require_subcommand(1);
    gen->fallthrough();  // -o may follow the kind subcommand
    std::string gen_out;
    gen->add_option("-o,--out", gen_out, "output path (stdout when omitted)");
    struct GenParams {
        int modes = 1;
        double r = 0.5, phi = 0.0, nbar = 0.0;
        std::vector<double> mean;
    };
    auto params = std::make_shared<GenParams>();
    auto* g_vac = gen->add_subcommand("vacuum", "vacuum state");
    g_vac->add_option("--modes", params->modes, "mode count")->check(CLI::PositiveNumber);
    g_vac->callback([&, params] { emit_document(make_vacuum(params->modes), gen_out); });
    auto* g_coh = gen->add_subcommand("coherent", "coherent state");
    g_coh->add_option("--mean", params->mean, "mean vector, xxpp order")
        ->required()
        ->delimiter(',');
    g_coh->callback([&, params] {
        if (params->mean.size() % 2 != 0)
            throw std::invalid_argument("--mean needs an even number of entries (xxpp)");
        emit_document(
            make_coherent(Eigen::Map<const Vec>(params->mean.data(), params->mean.size())),
            gen_out);
    });
    auto* g_th = gen->add_subcommand("thermal", "thermal state");
    g_th->add_option("--nbar", params->nbar, "mean occupation")->required();
    g_th->add_option("--modes", params->modes, "mode count")->check(CLI::PositiveNumber);
    g_th->callback([&, params] { emit_document(make_thermal(params->nbar, params->modes), gen_out); });
    auto* g_sq = gen->add_subcommand("squeezed", "single-mode squeezed state");
    g_sq->add_option("--r", params->r, "squeezing parameter")->required();
    g_sq->add_option("--phi", params->phi, "squeezing angle");
    g_sq->callback([&, params] { emit_document(make_squeezed(params->r, params->phi), gen_out); });
    auto* g_tm = gen->add_subcommand("tmsv", "two-mode squeezed vacuum, partition [A, B]");
    g_tm->add_option("--r", params->r, "squeezing parameter")->required();
    g_tm->callback([&, params] { emit_document(make_tmsv(params->r), gen_out); });

    // kappa / witness
    auto kflags = std::make_shared<KappaFlags>();
    for (const char* name : {"kappa", "witness"}) {
        auto* cmd = app.add_subcommand(
            name, std::string(name) == "kappa" ? "resource quantifier of a state document"
                                               : "dual witness for a state document");
        cmd->add_option("input", kflags->input, "CmDocument path")->required();
        cmd->add_option("--theory", kflags->theory,
                        "nonclassicality, ppt, steering, separability, separability_simplified")
            ->required();
        cmd->add_option("--partition", kflags->partition,
                        "colon-separated party labels, one per mode (overrides the document)");
        cmd->add_option("--party-a", kflags->party_a, "label of party A");
        cmd->add_option("--party-b", kflags->party_b, "label of party B");
        cmd->add_flag("--json", kflags->json, "machine-readable output");
        if (std::string(name) == "kappa") {
            cmd->add_option("--method", kflags->method, "automatic, analytic, sdp, bisect, both");
            cmd->callback([&, kflags] { exit_code = cmd_kappa(*kflags); });
        } else {
            cmd->callback([&, kflags] { exit_code = cmd_witness(*kflags); });
        }
    }

    // channel
    auto* chan = app.add_subcommand("channel", "apply a channel to a state document");
    chan->require_subcommand(1);
    auto cflags = std::make_shared<ChannelFlags>();
    struct ChanSpec { const char* kind; const char* help; };
    for (const auto& [kind, help] : {ChanSpec{"loss", "thermal loss channel"},
                                     ChanSpec{"bs", "two-mode beam splitter"},
                                     ChanSpec{"noise", "isotropic displacement noise"}}) {
        auto* c = chan->add_subcommand(kind, help);
        c->add_option("input", cflags->input, "CmDocument path")->required();
        c->add_option("-o,--out", cflags->out, "output path (stdout when omitted)");
        if (std::string(kind) == "loss") {
            c->add_option("--eta", cflags->eta, "transmissivity in [0, 1]")->required();
            c->add_option("--nbar", cflags->nbar, "environment occupation");
        } else if (std::string(kind) == "bs") {
            c->add_option("--theta", cflags->theta, "mixing angle (default pi/4)");
            c->add_option("--mode-i", cflags->mode_i, "first mode");
            c->add_option("--mode-j", cflags->mode_j, "second mode");
        } else {
            c->add_option("--sigma2", cflags->sigma2, "kernel variance, K = sigma2 * I")
                ->required();
        }
        std::string kind_copy = kind;
        c->callback([&, cflags, kind_copy] { exit_code = cmd_channel(kind_copy, *cflags); });
    }

    // harness
    auto* har = app.add_subcommand("harness", "run experiment suites");
    auto hflags = std::make_shared<HarnessFlags>();
    har->add_option("--suite", hflags->suite, "tensorization, nogo, monotonicity, all");
    har->add_option("--theory", hflags->theory, "theory name or all");
    har->add_option("--config", hflags->config, "JSON config overriding defaults");
    har->add_option("-o,--out", hflags->out, "report path (stdout JSON when omitted)");
    har->callback([&, hflags] { exit_code = cmd_harness(*hflags); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
