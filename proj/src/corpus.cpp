#include "nsa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "nsa/pipeline.hpp"
#include "nsa/ust.hpp"

namespace nsa {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Where two renderings part ways, with some context on each side.
std::string structural_diff(const std::string& want, const std::string& got) {
    std::size_t i = 0;
    while (i < want.size() && i < got.size() && want[i] == got[i]) ++i;
    std::size_t from = i > 40 ? i - 40 : 0;
    return "expected ..." + want.substr(from, 100) + "\n      got ..." + got.substr(from, 100);
}

std::string line_diff(const std::string& want, const std::string& got) {
    std::istringstream a(want), b(got);
    std::string la, lb;
    for (int line = 1;; ++line) {
        bool ea = !std::getline(a, la);
        bool eb = !std::getline(b, lb);
        if (ea && eb) return {};
        if (ea || eb || la != lb)
            return "golden line " + std::to_string(line) + ":\n  expected: " + (ea ? "<eof>" : la) +
                   "\n  actual:   " + (eb ? "<eof>" : lb);
    }
}

struct Spec {
    FormulaP input;
    std::vector<std::pair<std::string, FormulaP>> ust;  // raw / collapsed / simplified
    std::vector<std::pair<std::string, FormulaP>> checkpoints;
    FormulaP final_form, contract;
    std::optional<Strategy> strategy;
    std::vector<std::string> expect;
    std::string expect_error;
};

Spec read_spec(const std::string& text) {
    Spec s;
    for (const SExpr& form : read_sexprs(text)) {
        if (form.atom || form.items.empty() || !form.items[0].atom) parse_fail(form, "expected a fixture form");
        const std::string& head = form.items[0].text;
        auto formula_at = [&](std::size_t i) {
            if (form.items.size() != i + 1) parse_fail(form, "malformed (" + head + " ...)");
            std::vector<std::string> bound;
            return parse_formula(form.items[i], bound);
        };
        auto words = [&] {
            std::vector<std::string> out;
            for (std::size_t i = 1; i < form.items.size(); ++i) {
                if (!form.items[i].atom) parse_fail(form.items[i], "expected a name");
                out.push_back(form.items[i].text);
            }
            return out;
        };
        if (head == "input") s.input = formula_at(1);
        else if (head == "raw" || head == "collapsed" || head == "simplified") s.ust.emplace_back(head, formula_at(1));
        else if (head == "checkpoint") {
            if (form.items.size() != 3 || !form.items[1].atom) parse_fail(form, "malformed (checkpoint name F)");
            s.checkpoints.emplace_back(form.items[1].text, formula_at(2));
        } else if (head == "final") s.final_form = formula_at(1);
        else if (head == "contract") s.contract = formula_at(1);
        else if (head == "strategy") s.strategy = words();
        else if (head == "expect") s.expect = words();
        else if (head == "expect-error") {
            auto w = words();
            if (w.size() != 1) parse_fail(form, "malformed (expect-error kind)");
            s.expect_error = w[0];
        } else parse_fail(form, "unknown fixture form " + head);
    }
    if (!s.input) throw std::runtime_error("fixture has no (input F)");
    return s;
}

struct Checker {
    std::vector<std::string> failures;
    void alpha(const std::string& what, const FormulaP& want, const FormulaP& got) {
        if (!alpha_eq(want, got))
            failures.push_back(what + " differs\n      " + structural_diff(render_formula(want), render_formula(got)));
    }
    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

void run_ust(const Spec& s, Checker& c, std::ostream& out) {
    UstResult raw = interpret(s.input);
    out << "raw " << render_formula(render_ust(raw)) << "\n";
    UstResult collapsed = raw;
    bool did = collapse_bound_pair(collapsed);
    if (did) out << "collapsed " << render_formula(render_ust(collapsed)) << "\n";
    SimplifyOutcome simp = simplify_monotone(raw);
    static const char* names[] = {"simplified", "unchanged", "shape-mismatch"};
    out << "status " << names[static_cast<int>(simp.status)] << "\n";
    out << "simplified " << render_formula(render_ust(simp.result)) << "\n";
    for (const auto& [kind, want] : s.ust) {
        if (kind == "raw") c.alpha("raw", want, render_ust(raw));
        else if (kind == "collapsed") {
            c.require(did, "collapse_bound_pair did not apply");
            c.alpha("collapsed", want, render_ust(collapsed));
        } else {
            c.require(simp.status == SimplifyStatus::Simplified, "simplify_monotone reported no simplification");
            c.alpha("simplified", want, render_ust(simp.result));
        }
    }
}

void run_pipeline(const Spec& s, Checker& c, std::ostream& out) {
    Strategy strategy = s.strategy ? *s.strategy : default_strategy();
    if (s.expect_error == "proviso") {
        try {
            drop_st_on_sequence_quantifier(s.input);
            c.require(false, "drop-st accepted a non-REF atom");
        } catch (const PipelineError& e) {
            c.require(e.kind == PipelineError::Kind::ProvisoViolated, "expected ProvisoViolated");
            out << "drop-st refused: " << e.what() << "\n";
        }
    }
    TemplateResult r;
    try {
        r = run_template(s.input, strategy);
    } catch (const PipelineError& e) {
        out << "stuck: " << e.what() << "\n";
        c.require(!s.expect_error.empty(), std::string("run_template failed: ") + e.what());
        return;
    }
    c.require(s.expect_error.empty(), "expected the run to fail");
    std::size_t next = 0;
    for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
        const TraceStep& st = r.trace.steps[i];
        out << "step " << i + 1 << " " << st.rule << " | " << st.evidence << "\n  " << render_formula(st.after) << "\n";
        if (next < s.checkpoints.size() && alpha_eq(s.checkpoints[next].second, st.after)) {
            out << "  = " << s.checkpoints[next].first << "\n";
            ++next;
        }
    }
    if (next < s.checkpoints.size()) {
        const auto& [name, want] = s.checkpoints[next];
        std::string closest;
        for (const auto& st : r.trace.steps) closest = render_formula(st.after);
        c.failures.push_back("checkpoint " + name + " not reached in order\n      " +
                             structural_diff(render_formula(want), closest));
    }
    out << "final " << render_formula(r.final) << "\n";
    if (s.final_form) c.alpha("final", s.final_form, r.final);
    if (s.contract) {
        FormulaP got = extraction_contract(r.nf);
        out << "contract " << render_formula(got) << "\n";
        c.alpha("contract", s.contract, got);
    }
}

void run_display(const Spec& s, Checker& c, std::ostream& out) {
    Context types = infer_types(s.input);
    bool internal = is_internal(s.input);
    std::string reason;
    bool nf = try_recognize_normal_form(s.input, &reason).has_value();
    out << "internal " << (internal ? "yes" : "no") << "\nnormal-form " << (nf ? "yes" : "no") << "\n";
    for (const auto& [name, t] : types)
        if (!vocabulary().count(name)) out << "free " << name << " : " << render_type(t) << "\n";
    for (const auto& e : s.expect) {
        if (e == "internal") c.require(internal, "expected an internal formula");
        else if (e == "normal-form") c.require(nf, "expected a normal form: " + reason);
        else c.require(false, "unknown expectation " + e);
    }
}

}  // namespace

std::string default_corpus_dir() { return NSA_CORPUS_DIR; }

std::vector<fs::path> corpus_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".nsa") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

FixtureOutcome run_fixture(const fs::path& file, bool bless) {
    FixtureOutcome o;
    std::string group = file.parent_path().filename().string();
    o.name = group + "/" + file.stem().string();
    Checker c;
    std::ostringstream out;
    try {
        Spec s = read_spec(read_file(file));
        out << "input " << render_formula(s.input) << "\n";
        if (group == "ust") run_ust(s, c, out);
        else if (group == "pipeline") run_pipeline(s, c, out);
        else run_display(s, c, out);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("error: ") + e.what());
    }
    o.rendered = out.str();
    fs::path golden = file;
    golden.replace_extension(".golden");
    if (bless) {
        std::ofstream(golden, std::ios::binary) << o.rendered;
    } else if (!fs::exists(golden)) {
        c.failures.push_back("missing golden file " + golden.filename().string());
    } else if (auto d = line_diff(read_file(golden), o.rendered); !d.empty()) {
        c.failures.push_back(d);
    }
    o.pass = c.failures.empty();
    for (const auto& f : c.failures) o.detail += (o.detail.empty() ? "" : "\n") + f;
    return o;
}

std::vector<FixtureOutcome> run_corpus(const fs::path& dir, const std::string& only, bool bless) {
    std::vector<FixtureOutcome> out;
    for (const auto& f : corpus_files(dir)) {
        if (!only.empty() && f.parent_path().filename() != only && f.stem() != only) continue;
        out.push_back(run_fixture(f, bless));
    }
    return out;
}

}  // namespace nsa
