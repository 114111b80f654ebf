#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hype/parser.hpp"
#include "hype/trace_io.hpp"

namespace hype::testing {

std::string models_dir() { return HYPE_MODELS_DIR; }

std::string model_path(const std::string& name) { return models_dir() + "/" + name; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

HypeModel load_bundled(const std::string& name) { return load_model_file(model_path(name)); }

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_p_value(double statistic, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
    if (lambda < 1e-3) {
        return 1.0;
    }
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) {
            break;
        }
    }
    return std::clamp(sum, 0.0, 1.0);
}

namespace {

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

} // namespace

std::string random_model_text(std::mt19937_64& rng) {
    const int n_sub = uniform(rng, 1, 4);
    const int n_inst = uniform(rng, 1, 4);
    const int n_stoch = uniform(rng, 0, 3);
    std::vector<std::string> inst, stoch, all;
    for (int i = 0; i < n_inst; ++i) inst.push_back("a" + std::to_string(i));
    for (int i = 0; i < n_stoch; ++i) stoch.push_back("s" + std::to_string(i));
    all = inst;
    all.insert(all.end(), stoch.begin(), stoch.end());
    auto is_stoch = [&](const std::string& e) { return e[0] == 's'; };
    auto use = [&](const std::string& e) { return is_stoch(e) ? "~" + e : e; };

    std::ostringstream out;
    out << "model Random;\n";
    out << "param p = " << uniform(rng, 1, 9) << ".5;\n";
    out << "param q = -" << uniform(rng, 1, 5) << ";\n";
    std::vector<std::string> vars;
    for (int k = 0; k < n_sub; ++k) vars.push_back("X" + std::to_string(k));
    out << "var " << join(vars, ", ") << ";\n";
    out << "type const = 1;\ntype linear(x) = x;\ntype sq(x) = x * x;\n";
    for (int k = 0; k < n_sub; ++k) out << "iv i" << k << " = X" << k << ";\n";
    out << "event " << join(inst, ", ");
    for (const auto& s : stoch) out << ", ~" << s;
    out << ";\n";

    std::vector<std::string> init_assign;
    for (int k = 0; k < n_sub; ++k) {
        if (uniform(rng, 0, 1)) init_assign.push_back("X" + std::to_string(k) + "' = " + std::to_string(k + 1));
    }
    out << "ec(init) = (true, " << (init_assign.empty() ? "true" : join(init_assign, " and ")) << ");\n";
    const std::vector<std::string> guards{"X0 >= p", "X0 <= 3", "true", "X0 = 2 and X0 >= 0", "not (X0 < q)"};
    const std::vector<std::string> rates{"p", "0.25", "1 / (1 + X0 * X0)", "max(X0, 0)"};
    for (const auto& e : all) {
        const std::string var = pick(rng, vars);
        const std::string reset = uniform(rng, 0, 2) == 0 ? var + "' = 0" : "true";
        out << "ec(" << use(e) << ") = (" << (is_stoch(e) ? pick(rng, rates) : pick(rng, guards)) << ", " << reset
            << ");\n";
    }

    // Subcomponents; event sets are chosen first so synchronization sets
    // can be computed.
    std::vector<std::set<std::string>> sub_events(n_sub);
    for (int k = 0; k < n_sub; ++k) {
        for (const auto& e : all) {
            if (uniform(rng, 0, 2) == 0) sub_events[k].insert(e);
        }
    }
    // Every event must appear somewhere: controllers mention all of them and
    // an uncontrolled event needs a subcomponent to react to it.
    for (const auto& e : all) {
        bool used = false;
        for (const auto& s : sub_events) used = used || s.contains(e);
        if (!used) sub_events[uniform(rng, 0, n_sub - 1)].insert(e);
    }
    for (int k = 0; k < n_sub; ++k) {
        const std::string iname = "i" + std::to_string(k);
        const std::string var = "X" + std::to_string(k);
        const std::vector<std::string> influences{"(" + iname + ", 1, const)", "(" + iname + ", 0, const)",
                                                  "(" + iname + ", p, linear(" + var + "))",
                                                  "(" + iname + ", -2.5, sq(" + var + "))",
                                                  "(" + iname + ", q, linear(X0))"};
        const bool param = uniform(rng, 0, 3) == 0;
        const std::string self = param ? "S" + std::to_string(k) + "(" + var + ")" : "S" + std::to_string(k);
        std::vector<std::string> branches{"init:" + pick(rng, influences) + "." + self};
        for (const auto& e : sub_events[k]) {
            branches.push_back(use(e) + ":" + pick(rng, influences) + "." + self);
        }
        std::shuffle(branches.begin(), branches.end(), rng);
        out << "subcomponent " << self << " = " << join(branches, "\n    + ") << ";\n";
    }

    // Controllers: each one cycles through its share of the events.
    std::vector<std::string> shuffled = all;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const int n_con = uniform(rng, 1, static_cast<int>(shuffled.size()));
    std::vector<std::vector<std::string>> groups(n_con);
    for (std::size_t i = 0; i < shuffled.size(); ++i) groups[i % n_con].push_back(shuffled[i]);
    std::vector<std::string> con_names;
    for (int c = 0; c < n_con; ++c) {
        const std::string name = "C" + std::to_string(c);
        con_names.push_back(name);
        std::string body;
        const auto& g = groups[c];
        if (g.size() >= 2 && uniform(rng, 0, 1)) {
            // a choice between the first event and the rest in sequence
            std::string rest;
            for (std::size_t i = 1; i < g.size(); ++i) rest += use(g[i]) + ".";
            body = use(g[0]) + "." + name + " + " + rest + name;
        } else {
            for (const auto& e : g) body += use(e) + ".";
            body += uniform(rng, 0, 4) == 0 ? "0" : name;
        }
        out << "controller " << name << " = " << body << ";\n";
    }
    std::string con = con_names[0];
    if (n_con > 1) {
        out << "controller Con = " << join(con_names, " sync{} ") << ";\n";
        con = "Con";
    }

    // Left-nested uncontrolled system; each node syncs on init plus the
    // events its two sides share.
    std::set<std::string> left = sub_events[0];
    std::string text = out.str();
    auto leaf = [&](int k) {
        const std::string marker = "subcomponent S" + std::to_string(k) + "(";
        return text.find(marker) != std::string::npos ? "S" + std::to_string(k) + "(X" + std::to_string(k) + ")"
                                                      : "S" + std::to_string(k);
    };
    std::string sys = leaf(0);
    for (int k = 1; k < n_sub; ++k) {
        std::vector<std::string> sync{"init"};
        for (const auto& e : sub_events[k]) {
            if (left.contains(e)) sync.push_back(e);
        }
        sys = "(" + sys + " sync{" + join(sync, ", ") + "} " + leaf(k) + ")";
        left.insert(sub_events[k].begin(), sub_events[k].end());
    }
    std::vector<std::string> top{"init"};
    top.insert(top.end(), all.begin(), all.end());
    text += "system Sys = " + sys + ";\n";
    text += "system Top = Sys sync{" + join(top, ", ") + "} init." + con + ";\n";
    return text;
}

Tdsha random_tdsha(std::mt19937_64& rng) {
    static const std::vector<std::string> pool{"x", "y", "z"};
    static const std::vector<std::string> inst{"a", "b", "c"};
    static const std::vector<std::string> stoch{"r", "s"};
    Tdsha t;
    const int n = uniform(rng, 1, 4);
    for (int q = 0; q < n; ++q) {
        t.modes.push_back(ModeLabel::controller("m" + std::to_string(q) + "_" + std::to_string(uniform(rng, 0, 99))));
    }
    for (const auto& v : pool) {
        if (uniform(rng, 0, 1) || (t.variables.empty() && &v == &pool.back())) t.variables.push_back(v);
    }
    for (int q = 0; q < n; ++q) {
        for (int f = uniform(rng, 0, 2); f > 0; --f) {
            std::vector<double> s(t.variables.size(), 0.0);
            s[uniform(rng, 0, static_cast<int>(s.size()) - 1)] = pick(rng, std::vector<double>{1.0, -1.0, 0.5});
            t.flows.push_back({q, s, pick(rng, std::vector<Expr>{Expr::number(2.0), Expr::name(t.variables[0])})});
        }
    }
    // Fixed per-event resets and rates keep any pair compatible.
    auto reset_for = [&](const std::string& e) -> Reset {
        if (e == "a" && t.variables.front() == "x") return {{"x", Expr::number(0.0)}};
        return {};
    };
    for (const auto& e : inst) {
        if (uniform(rng, 0, 2) == 0) continue;
        t.instantaneous_events.insert(e);
        for (int k = uniform(rng, 0, 3); k > 0; --k) {
            const Expr guard = uniform(rng, 0, 1) ? Expr::boolean(true)
                                                  : Expr::binary(Op::Ge, Expr::name(t.variables[0]),
                                                                 Expr::number(uniform(rng, 0, 5)));
            t.instantaneous.push_back({uniform(rng, 0, n - 1), uniform(rng, 0, n - 1), guard, reset_for(e),
                                       static_cast<double>(uniform(rng, 1, 4)), e});
        }
    }
    for (const auto& e : stoch) {
        if (uniform(rng, 0, 2) == 0) continue;
        t.stochastic_events.insert(e);
        const Expr rate = e == "r" ? Expr::number(0.5) : Expr::name("k");
        for (int k = uniform(rng, 0, 2); k > 0; --k) {
            t.stochastic.push_back({uniform(rng, 0, n - 1), uniform(rng, 0, n - 1), Expr::boolean(true), {}, rate, e});
        }
    }
    t.parameters["k"] = 1.5;
    t.initial_mode = uniform(rng, 0, n - 1);
    if (uniform(rng, 0, 1)) t.initial_point.push_back({t.variables[0], Expr::number(1.0)});
    return t;
}

namespace {

void conjuncts(const Expr& e, std::vector<std::string>& out) {
    if (e.op() == Op::And) {
        conjuncts(e.operands()[0], out);
        conjuncts(e.operands()[1], out);
    } else if (!e.is_true()) {
        out.push_back(to_string(e));
    }
}

std::string guard_text(const Expr& e) {
    std::vector<std::string> parts;
    conjuncts(e, parts);
    std::sort(parts.begin(), parts.end());
    return "[" + join(parts, " & ") + "]";
}

std::string reset_text(const Reset& r) {
    std::vector<std::string> parts;
    for (const auto& a : r) parts.push_back(a.variable + "'=" + to_string(a.value));
    std::sort(parts.begin(), parts.end());
    return "{" + join(parts, ",") + "}";
}

} // namespace

std::vector<std::string> shape(const Tdsha& t, const std::function<std::string(int)>& mode_name) {
    std::vector<std::string> out;
    for (const auto& f : t.flows) {
        std::vector<std::string> parts;
        for (std::size_t j = 0; j < f.stoichiometry.size(); ++j) {
            if (f.stoichiometry[j] != 0.0) parts.push_back(t.variables[j] + ":" + format_number(f.stoichiometry[j]));
        }
        std::sort(parts.begin(), parts.end());
        out.push_back("flow " + mode_name(f.mode) + " " + join(parts, ",") + " " + to_string(f.rate));
    }
    for (const auto& tr : t.instantaneous) {
        out.push_back("inst " + tr.event + " " + mode_name(tr.source) + "->" + mode_name(tr.target) + " " +
                      guard_text(tr.guard) + " " + reset_text(tr.reset) + " w=" + format_number(tr.weight));
    }
    for (const auto& tr : t.stochastic) {
        out.push_back("stoch " + tr.event + " " + mode_name(tr.source) + "->" + mode_name(tr.target) + " " +
                      guard_text(tr.guard) + " " + reset_text(tr.reset) + " rate=" + to_string(tr.rate));
    }
    out.push_back("init " + mode_name(t.initial_mode) + " " + reset_text(t.initial_point));
    std::vector<std::string> vars = t.variables;
    std::sort(vars.begin(), vars.end());
    out.push_back("vars " + join(vars, ","));
    out.push_back("events " + join({t.instantaneous_events.begin(), t.instantaneous_events.end()}, ",") + " / " +
                  join({t.stochastic_events.begin(), t.stochastic_events.end()}, ","));
    std::sort(out.begin(), out.end());
    return out;
}

bool isomorphic_under(const Tdsha& a, const Tdsha& b, const std::function<int(int)>& map) {
    if (a.modes.size() != b.modes.size()) return false;
    std::set<int> image;
    for (int q = 0; q < static_cast<int>(a.modes.size()); ++q) image.insert(map(q));
    if (image.size() != a.modes.size()) return false;
    const auto sa = shape(a, [&](int q) { return "q" + std::to_string(map(q)); });
    const auto sb = shape(b, [](int q) { return "q" + std::to_string(q); });
    return sa == sb;
}

std::string canonical(const Trace& trace) {
    std::ostringstream out;
    write_trace_csv(out, trace);
    write_events_csv(out, trace);
    out << to_string(trace.termination) << '\n';
    return out.str();
}

} // namespace hype::testing
