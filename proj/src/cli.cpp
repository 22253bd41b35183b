#include "uext/cli.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uext/fo.hpp"
#include "uext/modal.hpp"
#include "uext/neighborhood.hpp"
#include "uext/presentation.hpp"
#include "uext/structure.hpp"
#include "uext/ultrafilter.hpp"

namespace uext::cli {

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitLimit = 3;

std::string fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

struct Report {
    std::string command;
    json inputs = json::array();
    json body = json::object();
    std::vector<std::string> lines;
    bool json_mode = false;
    bool timing = false;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void input(const std::string& path, const std::string& content) {
        inputs.push_back({{"path", path}, {"digest", fnv1a(content)}});
    }
    void line(const std::string& s) { lines.push_back(s); }

    void emit(std::ostream& out) {
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                        .count();
        if (json_mode) {
            json j;
            j["command"] = command;
            j["inputs"] = inputs;
            j["report"] = body;
            j["output"] = lines;
            if (timing) j["elapsed_ms"] = ms;
            out << j.dump(2) << "\n";
            return;
        }
        out << "uext " << command << "\n";
        for (const auto& in : inputs)
            out << "input " << in["path"].get<std::string>() << " fnv1a="
                << in["digest"].get<std::string>() << "\n";
        for (const auto& l : lines) out << l << "\n";
        if (timing) out << "elapsed_ms " << ms << "\n";
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << content;
}

RelKind parse_rel(const std::string& r) {
    if (r == "R") return RelKind::R;
    if (r == "S") return RelKind::S;
    if (r == "P") return RelKind::P;
    throw InputError("relation must be R, S or P");
}

/// Valuation strings look like "p=a,b;q=;r=c".
Valuation parse_valuation(const Structure& a, const std::string& text) {
    Valuation val;
    std::istringstream ss(text);
    std::string entry;
    while (std::getline(ss, entry, ';')) {
        if (entry.empty()) continue;
        auto eq = entry.find('=');
        if (eq == std::string::npos) throw InputError("bad valuation entry: " + entry);
        std::string var = entry.substr(0, eq);
        NodeSet set(a.size());
        std::istringstream nodes(entry.substr(eq + 1));
        std::string node;
        while (std::getline(nodes, node, ','))
            if (!node.empty()) set.insert(a.index(node));
        val[var] = set;
    }
    return val;
}

std::string valuation_str(const Structure& a, const Valuation& val) {
    std::ostringstream out;
    bool first_var = true;
    for (const auto& [v, set] : val) {
        if (!first_var) out << ";";
        first_var = false;
        out << v << "=";
        bool first = true;
        for (int w : set.elements()) {
            if (!first) out << ",";
            first = false;
            out << a.name(w);
        }
    }
    return out.str();
}

json valuation_json(const Structure& a, const Valuation& val) {
    json j = json::object();
    for (const auto& [v, set] : val) {
        json arr = json::array();
        for (int w : set.elements()) arr.push_back(a.name(w));
        j[v] = arr;
    }
    return j;
}

std::string nodeset_str(const Structure& a, const NodeSet& s) {
    std::string out = "{";
    bool first = true;
    for (int w : s.elements()) {
        if (!first) out += ",";
        first = false;
        out += a.name(w);
    }
    return out + "}";
}

struct Common {
    bool json_mode = false;
    bool timing = false;
    int threads = 1;
    int max_val_bits = 24;
    int max_frame_size = kMaxNodes;
};

Structure load_frame(const std::string& path, const Common& c, Report& rep) {
    std::string text = slurp(path);
    rep.input(path, text);
    Structure a = Structure::parse_frame(text);
    if (a.size() > c.max_frame_size)
        throw LimitError("frame has " + std::to_string(a.size()) + " nodes, cap is " +
                         std::to_string(c.max_frame_size));
    return a;
}

pres::Presentation load_abp(const std::string& path, Report& rep) {
    std::string text = slurp(path);
    rep.input(path, text);
    return pres::parse_presentation(text);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run(args, out, err);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const LimitError& e) {
        err << "limit exceeded: " << e.what() << "\n";
        return kExitLimit;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

namespace {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"workbench for ultrafilter extensions of relational structures at desk scale"};
    app.require_subcommand(1);

    Common common;
    app.add_flag("--json", common.json_mode, "structured output");
    app.add_flag("--timing", common.timing, "append elapsed time (breaks byte-stable output)");
    app.add_option("--threads", common.threads, "worker threads (1 = serial, 0 = all)");
    app.add_option("--max-val-bits", common.max_val_bits, "cap on |A| * #variables for valuation sweeps");
    app.add_option("--max-frame-size", common.max_frame_size, "cap on frame node count");

    std::string file, file2, outfile, formula_text, val_text, val2_text, at_node;
    std::string rel_text = "R", nbhd_rel_text = "S";
    std::string hub, type_frame, type_node;
    int karg = 3, kcrit = 2, narg = 0, radius = 1, rounds = 1, maxlen = 8;

    auto* fmt = app.add_subcommand("fmt", "canonical re-print of a .frame or .abp file");
    fmt->add_option("file", file)->required();
    fmt->add_option("-o", outfile);

    auto* validate = app.add_subcommand("validate", "check a presentation's structural laws");
    validate->add_option("file", file)->required();

    auto* expand = app.add_subcommand("expand", "truncate a presentation to a finite frame");
    expand->add_option("file", file)->required();
    expand->add_option("-k", karg, "uniform copies per block");
    expand->add_option("-o", outfile);

    auto* extend = app.add_subcommand("extend", "the ultrafilter extension of a presentation");
    extend->add_option("file", file)->required();
    extend->add_option("-o", outfile);

    auto* uecheck = app.add_subcommand("ue-check", "extension of a finite frame and its witness map");
    uecheck->add_option("file", file)->required();

    auto* roads = app.add_subcommand("roads", "shortest road between two nodes");
    roads->add_option("file", file)->required();
    roads->add_option("from", file2)->required();
    roads->add_option("to", at_node)->required();
    roads->add_option("--rel", rel_text);
    roads->add_option("--max-len", maxlen);

    auto* delta = app.add_subcommand("delta", "transport a set along a road of principal points");
    delta->add_option("file", file)->required();
    delta->add_option("from", file2)->required();
    delta->add_option("to", at_node)->required();
    delta->add_option("--set", val_text, "comma-separated node list, must contain the start");
    delta->add_option("--rel", rel_text);
    delta->add_option("--max-len", maxlen);

    auto* nbhd_cmd = app.add_subcommand("nbhd", "bounded-part neighborhood and its digest");
    nbhd_cmd->add_option("file", file)->required();
    nbhd_cmd->add_option("node", at_node)->required();
    nbhd_cmd->add_option("radius", radius)->required();
    nbhd_cmd->add_option("--rel", nbhd_rel_text);

    auto* chi = app.add_subcommand("chi", "describing formula of a node's neighborhood");
    chi->add_option("file", file)->required();
    chi->add_option("node", at_node)->required();
    chi->add_option("radius", radius)->required();

    auto* modal_cmd = app.add_subcommand("modal", "modal model checking");
    modal_cmd->require_subcommand(1);
    auto* mcheck = modal_cmd->add_subcommand("check", "truth at a node under a valuation");
    mcheck->add_option("file", file)->required();
    mcheck->add_option("formula", formula_text)->required();
    mcheck->add_option("--val", val_text)->required();
    mcheck->add_option("--at", at_node)->required();
    auto* mvalid = modal_cmd->add_subcommand("valid", "frame validity by valuation sweep");
    mvalid->add_option("file", file)->required();
    mvalid->add_option("formula", formula_text)->required();
    auto* malt = modal_cmd->add_subcommand("alt", "print the bounded-out-degree formula");
    malt->add_option("n", narg)->required();
    modal_cmd->add_subcommand("phi", "print the successor-cluster formula");

    auto* criterion = app.add_subcommand("criterion", "pointwise validity of alt-n | phi");
    criterion->add_option("file", file)->required();
    criterion->add_option("--alt", narg)->required();
    criterion->add_option("-k", kcrit, "truncation size for finite-degree points");

    auto* cex = app.add_subcommand("counterexample", "finite countermodel at a failing hub");
    cex->add_option("file", file)->required();
    cex->add_option("--hub", hub)->required();
    cex->add_option("--alt", narg)->required();
    cex->add_option("-k", karg);

    auto* bisim = app.add_subcommand("bisim", "greatest bisimulation between two models");
    bisim->add_option("file1", file)->required();
    bisim->add_option("file2", file2)->required();
    bisim->add_option("--val1", val_text);
    bisim->add_option("--val2", val2_text);

    auto* fo_cmd = app.add_subcommand("fo", "first-order tools");
    fo_cmd->require_subcommand(1);
    auto* feval = fo_cmd->add_subcommand("eval", "truth of a sentence on a frame");
    feval->add_option("file", file)->required();
    feval->add_option("sentence", formula_text)->required();
    auto* ftrans = fo_cmd->add_subcommand("translate", "rewrite an R-sentence over {S, P}");
    ftrans->add_option("sentence", formula_text)->required();
    auto* fef = fo_cmd->add_subcommand("ef", "bounded-round game equivalence of two frames");
    fef->add_option("file1", file)->required();
    fef->add_option("file2", file2)->required();
    fef->add_option("-q", rounds)->required();

    auto* counts = app.add_subcommand("counts", "symbolic point counts over a presentation");
    counts->add_option("file", file)->required();
    counts->add_option("--type-frame", type_frame, "frame supplying a reference neighborhood");
    counts->add_option("--type-node", type_node, "its root node");

    std::vector<std::string> argv = args;
    std::reverse(argv.begin(), argv.end());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitPass;
        }
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    Report rep;
    rep.json_mode = common.json_mode;
    rep.timing = common.timing;
    for (const auto& a : args) rep.command += (rep.command.empty() ? "" : " ") + a;

    auto finish = [&](int code) {
        rep.body["exit"] = code;
        rep.emit(out);
        return code;
    };

    if (*fmt) {
        std::string text = slurp(file);
        rep.input(file, text);
        std::string printed;
        if (file.size() >= 4 && file.substr(file.size() - 4) == ".abp")
            printed = pres::print_presentation(pres::parse_presentation(text));
        else
            printed = Structure::parse_frame(text).print_frame();
        if (!outfile.empty()) {
            spill(outfile, printed);
            rep.line("wrote " + outfile);
        } else {
            std::istringstream ss(printed);
            std::string l;
            while (std::getline(ss, l)) rep.line(l);
        }
        rep.body["formatted"] = printed;
        return finish(kExitPass);
    }

    if (*validate) {
        auto p = load_abp(file, rep);
        auto r = pres::validate(p);
        rep.body["pass"] = r.pass();
        rep.body["violations"] = r.violations;
        rep.line(r.pass() ? "PASS" : "FAIL");
        for (const auto& v : r.violations) rep.line("violation: " + v);
        return finish(r.pass() ? kExitPass : kExitFail);
    }

    if (*expand) {
        auto p = load_abp(file, rep);
        auto r = pres::validate(p);
        if (!r.pass()) {
            rep.line("FAIL: presentation invalid");
            for (const auto& v : r.violations) rep.line("violation: " + v);
            return finish(kExitFail);
        }
        Structure a = pres::expand(p, karg);
        std::string printed = a.print_frame();
        rep.body["frame"] = printed;
        if (!outfile.empty()) {
            spill(outfile, printed);
            rep.line("wrote " + outfile);
        } else {
            std::istringstream ss(printed);
            std::string l;
            while (std::getline(ss, l)) rep.line(l);
        }
        return finish(kExitPass);
    }

    if (*extend) {
        auto p = load_abp(file, rep);
        pres::Presentation e = pres::extend(p);
        std::string printed = pres::print_presentation(e);
        rep.body["presentation"] = printed;
        if (!outfile.empty()) {
            spill(outfile, printed);
            rep.line("wrote " + outfile);
        } else {
            std::istringstream ss(printed);
            std::string l;
            while (std::getline(ss, l)) rep.line(l);
        }
        return finish(kExitPass);
    }

    if (*uecheck) {
        Structure a = load_frame(file, common, rep);
        uf::UeExtensionResult r = uf::ue_extension_finite(a);
        rep.body["isomorphic"] = r.isomorphic;
        rep.line(r.isomorphic ? "ue(A) isomorphic to A via the principal map"
                              : "ue(A) NOT isomorphic to A");
        for (const auto& [from, to] : r.witness) rep.line("  " + from + " -> " + to);
        return finish(r.isomorphic ? kExitPass : kExitFail);
    }

    if (*roads) {
        Structure a = load_frame(file, common, rep);
        auto road = find_road(a, parse_rel(rel_text), a.index(file2), a.index(at_node), maxlen);
        if (!road) {
            rep.line("no road within " + std::to_string(maxlen) + " steps");
            return finish(kExitFail);
        }
        std::string line = a.name(road->nodes[0]);
        for (int i = 0; i < road->length(); ++i)
            line += (road->forward[i] ? " >" : " <") + (" " + a.name(road->nodes[i + 1]));
        rep.body["length"] = road->length();
        rep.line("road: " + line);
        return finish(kExitPass);
    }

    if (*delta) {
        Structure a = load_frame(file, common, rep);
        RelKind q = parse_rel(rel_text);
        int s = a.index(file2), t = a.index(at_node);
        auto road = find_road(a, q, s, t, maxlen);
        if (!road) {
            rep.line("no road to transport along");
            return finish(kExitFail);
        }
        NodeSet x(a.size());
        if (val_text.empty()) x.insert(s);
        else {
            std::istringstream ss(val_text);
            std::string node;
            while (std::getline(ss, node, ','))
                if (!node.empty()) x.insert(a.index(node));
        }
        std::vector<uf::Ultrafilter> ufs;
        for (int v : road->nodes) ufs.push_back(uf::Ultrafilter::principal(a, v));
        auto dsets = uf::distinguishing_sets(a, ufs);
        NodeSet d = uf::ultrafilter_road_delta(a, q, x, ufs, road->forward, dsets);
        bool member = ufs.back().contains(d);
        rep.body["delta"] = nodeset_str(a, d);
        rep.body["in_final"] = member;
        rep.line("delta = " + nodeset_str(a, d));
        rep.line(member ? "delta belongs to the final ultrafilter"
                        : "delta does NOT belong to the final ultrafilter");
        return finish(member ? kExitPass : kExitFail);
    }

    if (*nbhd_cmd) {
        Structure a = load_frame(file, common, rep);
        nbhd::Neighborhood nb = nbhd::extract(a, parse_rel(nbhd_rel_text), a.index(at_node), radius);
        auto cf = nbhd::canonical_form(nb);
        rep.body["digest"] = cf.digest;
        rep.line("nodes: " + std::to_string(nb.size()));
        for (int i = 0; i < nb.size(); ++i) {
            std::string ann;
            for (const auto& [dir, h] : nb.annotations[i])
                ann += (dir == nbhd::Dir::Out ? " out:" : " in:") + h;
            rep.line("  " + nb.node_names[i] + (i == nb.root ? " (root)" : "") + ann);
        }
        for (const auto& [i, j] : nb.s_edges)
            rep.line("  edge " + nb.node_names[i] + " " + nb.node_names[j]);
        rep.line("digest: " + cf.digest);
        return finish(kExitPass);
    }

    if (*chi) {
        Structure a = load_frame(file, common, rep);
        nbhd::Neighborhood nb = nbhd::extract(a, RelKind::S, a.index(at_node), radius);
        std::vector<std::string> hubs;
        for (int v = 0; v < a.size(); ++v)
            if (a.is_hub(v)) hubs.push_back(a.name(v));
        fo::FormulaPtr f = nbhd::emit_chi(nb, radius, hubs);
        rep.body["formula"] = fo::to_string(f);
        rep.line(fo::to_string(f));
        return finish(kExitPass);
    }

    if (*mcheck) {
        Structure a = load_frame(file, common, rep);
        modal::FormulaPtr f = modal::parse_modal(formula_text);
        Valuation val = parse_valuation(a, val_text);
        bool r = modal::check(a, val, a.index(at_node), f);
        rep.body["true"] = r;
        rep.line(r ? "true" : "false");
        return finish(r ? kExitPass : kExitFail);
    }

    if (*mvalid) {
        Structure a = load_frame(file, common, rep);
        modal::FormulaPtr f = modal::parse_modal(formula_text);
        modal::FrameValidOptions opt{common.max_val_bits, common.threads};
        modal::Verdict v = modal::frame_valid(a, f, opt);
        switch (v.kind) {
            case modal::Verdict::Kind::Valid:
                rep.body["verdict"] = "valid";
                rep.line("valid");
                return finish(kExitPass);
            case modal::Verdict::Kind::Overflow:
                rep.body["verdict"] = "overflow";
                rep.line("overflow: raise --max-val-bits");
                return finish(kExitLimit);
            case modal::Verdict::Kind::Counterexample:
                rep.body["verdict"] = "counterexample";
                rep.body["valuation"] = valuation_json(a, v.valuation);
                rep.body["node"] = a.name(v.node);
                rep.line("counterexample at " + a.name(v.node));
                rep.line("valuation " + valuation_str(a, v.valuation));
                return finish(kExitFail);
        }
    }

    if (*malt) {
        rep.line(modal::to_string(modal::alt_n(narg)));
        rep.body["formula"] = modal::to_string(modal::alt_n(narg));
        return finish(kExitPass);
    }
    if (modal_cmd->got_subcommand("phi")) {
        rep.line(modal::to_string(modal::phi_formula()));
        rep.body["formula"] = modal::to_string(modal::phi_formula());
        return finish(kExitPass);
    }

    if (*criterion) {
        auto p = load_abp(file, rep);
        modal::CriterionOptions opt;
        opt.expand_k = kcrit;
        opt.max_val_bits = common.max_val_bits;
        opt.threads = common.threads;
        modal::CriterionVerdict v = modal::criterion_validity(p, narg, opt);
        rep.body["valid"] = v.valid;
        if (v.valid) {
            rep.line("Valid");
            return finish(kExitPass);
        }
        rep.body["witness"] = v.witness;
        rep.line("Invalid at " + v.witness);
        return finish(kExitFail);
    }

    if (*cex) {
        auto p = load_abp(file, rep);
        modal::FrameValidOptions opt{common.max_val_bits, common.threads};
        modal::CounterexampleFrame r = modal::counterexample_frame(p, hub, narg, karg, opt);
        rep.body["frame"] = r.frame.print_frame();
        rep.body["valuation"] = valuation_json(r.frame, r.valuation);
        rep.body["node"] = r.frame.name(r.node);
        rep.line("countermodel frame:");
        std::istringstream ss(r.frame.print_frame());
        std::string l;
        while (std::getline(ss, l)) rep.line("  " + l);
        rep.line("valuation " + valuation_str(r.frame, r.valuation));
        rep.line("falsified at " + r.frame.name(r.node) + " (verified)");
        return finish(kExitPass);
    }

    if (*bisim) {
        Structure a = load_frame(file, common, rep);
        Structure b = load_frame(file2, common, rep);
        modal::Model m1{a, parse_valuation(a, val_text)};
        modal::Model m2{b, parse_valuation(b, val2_text)};
        modal::Bisimulation z = modal::largest_bisimulation(m1, m2);
        json pairs = json::array();
        for (const auto& [x, y] : z.pairs) {
            rep.line(a.name(x) + " ~ " + b.name(y));
            pairs.push_back({a.name(x), b.name(y)});
        }
        rep.body["pairs"] = pairs;
        if (z.empty()) rep.line("empty bisimulation");
        return finish(z.empty() ? kExitFail : kExitPass);
    }

    if (*feval) {
        Structure a = load_frame(file, common, rep);
        fo::FormulaPtr f = fo::parse_fo(formula_text);
        if (!fo::free_vars(f).empty()) throw InputError("sentence required (no free variables)");
        bool r = fo::eval(a, f);
        rep.body["true"] = r;
        rep.line(r ? "true" : "false");
        return finish(r ? kExitPass : kExitFail);
    }

    if (*ftrans) {
        fo::FormulaPtr f = fo::parse_fo(formula_text);
        std::string t = fo::to_string(fo::sharp_translate(f));
        rep.body["formula"] = t;
        rep.line(t);
        return finish(kExitPass);
    }

    if (*fef) {
        Structure a = load_frame(file, common, rep);
        Structure b = load_frame(file2, common, rep);
        fo::EfOptions opt;
        opt.max_rounds = std::max(opt.max_rounds, rounds);
        bool r = fo::ef_equivalent(a, b, rounds, opt);
        rep.body["equivalent"] = r;
        rep.line(r ? "equivalent at " + std::to_string(rounds) + " rounds"
                   : "distinguishable within " + std::to_string(rounds) + " rounds");
        return finish(r ? kExitPass : kExitFail);
    }

    if (*counts) {
        auto p = load_abp(file, rep);
        if (!type_frame.empty()) {
            Structure a = load_frame(type_frame, common, rep);
            nbhd::Neighborhood nb = nbhd::extract_component(a, RelKind::S, a.index(type_node));
            Card c = pres::count_neighborhood_type(p, nb);
            rep.body["count"] = c.to_string();
            rep.line("points of that component type: " + c.to_string());
            return finish(kExitPass);
        }
        auto counts_v = pres::count_reflexive(p);
        for (const auto& [origin, c] : counts_v) {
            std::string o = origin == pres::Origin::Principal ? "principal" : "nonprincipal";
            rep.body[o] = c.to_string();
            rep.line("reflexive " + o + " points: " + c.to_string());
        }
        return finish(kExitPass);
    }

    err << "unhandled subcommand\n";
    return kExitUsage;
}

}  // namespace

}  // namespace uext::cli
