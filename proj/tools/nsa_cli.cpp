#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsa/corpus.hpp"
#include "nsa/pipeline.hpp"
#include "nsa/syntax.hpp"
#include "nsa/ust.hpp"
#include "nsa/verifier.hpp"

using namespace nsa;
using ojson = nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string in, out, format = "text";
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t trials = 100;
    std::size_t budget = 200;
    bool trace = false;
    std::string theorem, f, g, h;
    std::uint64_t n = 10, k = 10, l = 4;
    std::string only;
    bool bless = false;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Input {
    FormulaP formula;
    std::optional<Strategy> strategy;
};

Input read_input(const std::string& path) {
    std::string text;
    if (path.empty() || path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
        std::ifstream is(path);
        if (!is) throw UsageError("cannot read " + path);
        text.assign(std::istreambuf_iterator<char>(is), {});
    }
    std::vector<SExpr> forms = read_sexprs(text);
    Input in;
    for (const auto& e : forms) {
        auto head_is = [&e](const char* h) { return !e.atom && !e.items.empty() && e.items[0].atom && e.items[0].text == h; };
        if (head_is("input") && e.items.size() == 2) {
            std::vector<std::string> bound;
            in.formula = parse_formula(e.items[1], bound);
        } else if (head_is("strategy")) {
            Strategy s;
            for (std::size_t i = 1; i < e.items.size(); ++i) s.push_back(e.items[i].text);
            in.strategy = s;
        }
    }
    if (!in.formula) {
        if (forms.size() != 1) throw UsageError("expected one formula or an (input F) form");
        std::vector<std::string> bound;
        in.formula = parse_formula(forms[0], bound);
    }
    return in;
}

class Output {
public:
    explicit Output(const RunConfig& cfg) : json_(cfg.format == "json-lines") {
        if (!cfg.out.empty()) {
            file_.open(cfg.out);
            if (!file_) throw UsageError("cannot write " + cfg.out);
        }
    }
    bool json() const { return json_; }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }
    void record(const ojson& j) { os() << j.dump() << "\n"; }

private:
    bool json_;
    std::ofstream file_;
};

int cmd_typecheck(const RunConfig& cfg, Output& out) {
    Input in = read_input(cfg.in);
    Context types;
    try {
        types = infer_types(in.formula);
    } catch (const FormulaError& e) {
        if (out.json()) out.record({{"command", "typecheck"}, {"ok", false}, {"error", e.what()}});
        else out.os() << "ill-typed: " << e.what() << "\n";
        return 1;
    }
    bool internal = is_internal(in.formula);
    if (out.json()) {
        ojson ts = ojson::object();
        for (const auto& [v, t] : types) ts[v] = render_type(t);
        out.record({{"command", "typecheck"}, {"ok", true}, {"internal", internal}, {"free", ts}});
    } else {
        out.os() << "well-typed" << (internal ? ", internal" : "") << "\n";
        for (const auto& [v, t] : types) out.os() << "  " << v << " : " << render_type(t) << "\n";
    }
    return 0;
}

int cmd_ust(const RunConfig& cfg, Output& out) {
    Input in = read_input(cfg.in);
    UstResult raw = interpret(in.formula);
    SimplifyOutcome simp = simplify_monotone(raw);
    static const char* names[] = {"simplified", "unchanged", "shape-mismatch"};
    const char* status = names[static_cast<int>(simp.status)];
    std::string r = render_formula(render_ust(raw)), s = render_formula(render_ust(simp.result));
    if (out.json()) {
        out.record({{"command", "ust"}, {"input", render_formula(in.formula)}, {"raw", r}, {"status", status}, {"simplified", s}});
    } else {
        out.os() << "raw        " << r << "\n";
        out.os() << "status     " << status << "\n";
        out.os() << "simplified " << s << "\n";
    }
    return 0;
}

int cmd_normalform(const RunConfig& cfg, Output& out) {
    Input in = read_input(cfg.in);
    Strategy strategy = in.strategy ? *in.strategy : default_strategy();
    TemplateResult r;
    try {
        r = run_template(in.formula, strategy, cfg.budget);
    } catch (const PipelineError& e) {
        if (e.kind != PipelineError::Kind::Stuck) throw;
        if (out.json()) out.record({{"command", "normalform"}, {"ok", false}, {"error", e.what()}});
        else out.os() << "stuck: " << e.what() << "\n";
        return 1;
    }
    if (cfg.trace) {
        for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
            const TraceStep& st = r.trace.steps[i];
            std::string after = render_formula(st.after);
            if (out.json())
                out.record({{"step", i + 1}, {"rule", st.rule}, {"evidence", st.evidence}, {"after", after}});
            else
                out.os() << "step " << i + 1 << " " << st.rule << " | " << st.evidence << "\n  " << after << "\n";
        }
    }
    std::string fin = render_formula(r.final);
    std::string contract = render_formula(extraction_contract(r.nf));
    if (out.json()) {
        out.record({{"command", "normalform"}, {"ok", true}, {"steps", r.trace.steps.size()}, {"final", fin}, {"contract", contract}});
    } else {
        out.os() << "final " << fin << "\n";
        out.os() << "contract " << contract << "\n";
    }
    return 0;
}

std::map<std::string, Rational> with_n(std::uint64_t n) { return {{"n", Rational(std::max<std::uint64_t>(n, 1))}}; }

int cmd_verify(const RunConfig& cfg, Output& out) {
    if (cfg.f.empty()) throw UsageError("verify needs --f");
    const std::string& thm = cfg.theorem;
    VerificationReport rep;
    if (thm == "ulc") {
        if (cfg.g.empty() || cfg.h.empty()) throw UsageError("verify ulc needs --g and --h");
        ExprP fe = parse_expr(cfg.f), ge = parse_expr(cfg.g);
        FnFamily fs = [fe](std::uint64_t n) { return real_fn(fe, with_n(n)); };
        ModulusFamily gs = [ge](std::uint64_t n) { return modulus_fn(ge, with_n(n)); };
        rep = check_ulc(fs, gs, parse_modulus(cfg.h), cfg.k, cfg.trials, cfg.seed);
    } else {
        RealFn f = parse_real_fn(cfg.f);
        Fn1 g;
        if (!cfg.g.empty()) g = parse_modulus(cfg.g);
        else if (f.modulus) g = *f.modulus;
        else throw UsageError("no modulus for " + cfg.f + "; pass --g");
        if (thm == "cri") rep = check_cri(f, g, cfg.n, cfg.trials, cfg.seed);
        else if (thm == "ftc") rep = check_ftc(f, g, cfg.k, cfg.l, cfg.trials, cfg.seed);
        else if (thm == "ftc2") rep = check_ftc_second(f, g, cfg.k);
        else if (thm == "wei") rep = check_wei(f, g, cfg.k, cfg.trials, cfg.seed);
        else if (thm == "ivt") rep = check_ivt(f, g, cfg.k);
        else rep = check_ivt(f, g, cfg.k, IvtMode::FixedPoint);
    }
    if (out.json()) out.os() << rep.json_line() << "\n";
    else out.os() << rep.text();
    return rep.pass ? 0 : 1;
}

int cmd_corpus(const RunConfig& cfg, Output& out) {
    std::string dir = cfg.in.empty() ? default_corpus_dir() : cfg.in;
    std::vector<FixtureOutcome> rs = run_corpus(dir, cfg.only, cfg.bless);
    if (rs.empty()) throw UsageError("no fixtures selected");
    std::size_t failed = 0;
    for (const auto& r : rs) {
        if (!r.pass) ++failed;
        if (out.json()) {
            ojson j = {{"fixture", r.name}, {"pass", r.pass}};
            if (!r.pass) j["detail"] = r.detail;
            out.record(j);
        } else {
            out.os() << (r.pass ? "PASS " : "FAIL ") << r.name << "\n";
            if (!r.pass) out.os() << "  " << r.detail << "\n";
        }
    }
    if (out.json()) out.record({{"fixtures", rs.size()}, {"failed", failed}});
    else out.os() << rs.size() - failed << "/" << rs.size() << " fixtures pass\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Proof-mining toolkit for nonstandard analysis formulas"};
    app.set_help_flag("--help", "print this help");  // -h would clash with --h
    app.require_subcommand(1);
    auto add_io = [&cfg](CLI::App* sub) {
        sub->add_option("--in", cfg.in, "input file (default stdin)");
        sub->add_option("--out", cfg.out, "output file (default stdout)");
        sub->add_option("--format", cfg.format, "text or json-lines")->check(CLI::IsMember({"text", "json-lines"}));
    };
    CLI::App* tc = app.add_subcommand("typecheck", "infer types of free variables");
    CLI::App* ust = app.add_subcommand("ust", "interpret and simplify");
    CLI::App* nf = app.add_subcommand("normalform", "run the rewrite pipeline");
    CLI::App* ver = app.add_subcommand("verify", "check an extracted bound numerically");
    CLI::App* cor = app.add_subcommand("corpus", "run the fixture corpus");
    for (CLI::App* s : {tc, ust, nf, ver, cor}) add_io(s);
    nf->add_flag("--trace", cfg.trace, "print every rewrite step");
    nf->add_option("--budget", cfg.budget, "rewrite step budget");
    ver->add_option("theorem", cfg.theorem, "cri, ftc, ftc2, ulc, wei, ivt or brouwer")
        ->required()
        ->check(CLI::IsMember({"cri", "ftc", "ftc2", "ulc", "wei", "ivt", "brouwer"}));
    ver->add_option("--f", cfg.f, "function of x (for ulc, also of n)");
    ver->add_option("--g", cfg.g, "modulus in k (for ulc, also in n)");
    ver->add_option("--h", cfg.h, "rate of uniform convergence in k");
    ver->add_option("--n", cfg.n, "precision for cri");
    ver->add_option("--k", cfg.k, "precision");
    ver->add_option("--l", cfg.l, "ftc interval margin");
    ver->add_option("--trials", cfg.trials, "random trials");
    ver->add_option("--seed", cfg.seed, "random seed");
    cor->add_option("--only", cfg.only, "group or fixture name");
    cor->add_flag("--bless", cfg.bless, "rewrite golden files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        Output out(cfg);
        if (tc->parsed()) return cmd_typecheck(cfg, out);
        if (ust->parsed()) return cmd_ust(cfg, out);
        if (nf->parsed()) return cmd_normalform(cfg, out);
        if (ver->parsed()) return cmd_verify(cfg, out);
        return cmd_corpus(cfg, out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const KernelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CRealError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormulaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const VerifyError& e) {
        std::cerr << "verification refused: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
