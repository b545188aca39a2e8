#include "cli.hpp"

#include "on2vec/config.hpp"
#include "on2vec/dataset.hpp"
#include "on2vec/energy.hpp"
#include "on2vec/errors.hpp"
#include "on2vec/evaluation.hpp"
#include "on2vec/io.hpp"
#include "on2vec/log.hpp"
#include "on2vec/synthetic.hpp"
#include "on2vec/text.hpp"
#include "on2vec/training.hpp"
#include "on2vec/verification.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace on2vec::cli {

namespace {

const char* const config_keys[] = {"profile", "k",         "gamma1",   "gamma2",  "lambda", "alpha1",
                                   "alpha2",  "batch_size", "norm",     "variant", "seed",   "max_epochs",
                                   "patience", "threads",   "train",    "valid",   "test",   "meta",
                                   "checkpoint", "report",  "log"};

// Every config key as a flag; given flags override the config file, which
// overrides the profile.
struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_config_flags(CLI::App& cmd, ConfigFlags& f) {
    cmd.add_option("--config", f.config_path, "key=value run configuration file");
    for (const char* key : config_keys) {
        std::string names = std::string("--") + key;
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        if (dashed != key) names += ",--" + dashed;
        f.options.emplace_back(key, cmd.add_option(names, f.values[key], std::string("config key ") + key));
    }
}

RunConfig resolve(const ConfigFlags& f) {
    std::vector<Setting> settings;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw InputError("cannot open config '" + f.config_path + "'");
        settings = read_settings(in, f.config_path);
    }
    for (const auto& [key, opt] : f.options) {
        if (opt->count() == 0) continue;
        std::erase_if(settings, [&key](const Setting& s) { return s.key == key; });
        settings.push_back({key, f.values.at(key), "--" + key});
    }
    return resolve_settings(settings);
}

void require(const fs::path& p, const char* key, const char* command) {
    if (p.empty()) throw InputError(std::string(command) + " needs --" + key);
}

OntologyGraph build_graph(const fs::path& triples, std::vector<RelationMeta> meta) {
    const auto raw = load_triples(triples);
    try {
        return OntologyGraph::build(raw, std::move(meta));
    } catch (const InputError& e) {
        throw InputError(triples.string() + ": " + e.what());
    }
}

// Ids of named triples in a fixed registry. Unknown concepts are dropped
// with a warning when `drop_unknown`, otherwise rejected.
std::vector<Triple> map_triples(const OntologyGraph& reg, std::span<const RawTriple> raw, const fs::path& origin,
                                bool drop_unknown) {
    std::vector<Triple> out;
    std::size_t dropped = 0;
    for (const auto& t : raw) {
        const auto where = origin.string() + ":" + std::to_string(t.line) + ": ";
        const auto r = reg.find_relation(t.relation);
        if (!r) throw InputError(where + "unknown relation '" + t.relation + "'");
        const auto s = reg.find_concept(t.source), d = reg.find_concept(t.target);
        if (!s || !d) {
            if (drop_unknown) {
                ++dropped;
                continue;
            }
            throw InputError(where + "unknown concept '" + (s ? t.target : t.source) + "'");
        }
        out.push_back({*s, *r, *d});
    }
    if (dropped)
        warn(origin.string() + ": dropped " + std::to_string(dropped) + " triples with concepts unseen in training");
    return out;
}

// Registry for a trained model. Relation flags come from `meta` when given,
// whose names must match the checkpoint's in order.
OntologyGraph checkpoint_registry(const ModelParams& p, const std::vector<RelationMeta>* meta) {
    std::vector<RelationMeta> rels;
    if (meta) {
        bool same = meta->size() == p.relation_names.size();
        for (std::size_t i = 0; same && i < meta->size(); ++i) same = (*meta)[i].name == p.relation_names[i];
        if (!same) throw InputError("relation metadata does not match the checkpoint's relations");
        rels = *meta;
    } else {
        for (std::size_t i = 0; i < p.relation_names.size(); ++i)
            rels.push_back({static_cast<RelationId>(i), p.relation_names[i], false, false, false, false});
    }
    return OntologyGraph(p.concept_names, std::move(rels), {});
}

SplitFractions parse_fractions(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::logic_error&) {
            throw InputError("bad split fraction '" + part + "'");
        }
    }
    if (v.size() != 3) throw InputError("split needs three comma-separated fractions");
    return {v[0], v[1], v[2]};
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::logic_error&) {
            throw InputError("bad number '" + part + "' in list");
        }
    }
    if (v.empty()) throw InputError("empty list");
    return v;
}

std::string fixed(double x, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << x;
    return s.str();
}

void print_stats(std::ostream& out, const DatasetStats& s) {
    out << "triples\tpct.prop\tpct.hier\t#rel.\t#con.\n"
        << s.triples << '\t' << fixed(s.pct_property(), 2) << '\t' << fixed(s.pct_hierarchical(), 2) << '\t'
        << s.relations << '\t' << s.concepts << '\n';
}

void write_split(const fs::path& dir, const OntologyGraph& g, const DatasetSplit& split) {
    write_file_atomic(dir / "train.tsv", format_triples(g.with_triples(split.train).to_raw()));
    write_file_atomic(dir / "valid.tsv", format_triples(g.with_triples(split.valid).to_raw()));
    write_file_atomic(dir / "test.tsv", format_triples(g.with_triples(split.test).to_raw()));
    write_file_atomic(dir / "meta.tsv", format_relation_meta(g.relations()));
}

nlohmann::json config_json(const RunConfig& rc) {
    nlohmann::json j = nlohmann::json::object();
    std::istringstream in(format_run_config(rc));
    for (const auto& s : read_settings(in, "config")) j[s.key] = s.value;
    return j;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

// ---- prep / synth ----------------------------------------------------------

struct PrepArgs {
    std::string in, meta, out, split = "0.8,0.1,0.1";
    int max_hops = 4;
    std::uint64_t seed = 1;
};

void cmd_prep(const PrepArgs& a, std::ostream& out) {
    const auto g = build_graph(a.in, load_relation_meta(a.meta));
    const auto trunc = truncate_transitive(g, a.max_hops);
    for (const auto& w : trunc.warnings) warn(w);
    const auto split = split_dataset(trunc.graph, parse_fractions(a.split), a.seed);
    write_split(a.out, trunc.graph, split);
    print_stats(out, dataset_stats(trunc.graph));
    out << "discarded " << trunc.discarded << " facts beyond " << a.max_hops << " hops\n"
        << "train/valid/test " << split.train.size() << '/' << split.valid.size() << '/' << split.test.size()
        << " written to " << a.out << '\n';
}

struct SynthArgs {
    std::string spec, out;
    std::uint64_t seed = 1;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
    const SyntheticSpec spec = a.spec.empty() ? SyntheticSpec{} : load_synthetic_spec(a.spec);
    const auto synth = generate_synthetic_ontology(spec, a.seed);
    write_split(a.out, synth.graph, synth.split);
    print_stats(out, dataset_stats(synth.graph));
    out << "train/valid/test " << synth.split.train.size() << '/' << synth.split.valid.size() << '/'
        << synth.split.test.size() << " written to " << a.out << '\n';
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    ConfigFlags cfg;
    std::string sweep, sweep_out;
    bool deterministic = false;
};

struct Corpus {
    OntologyGraph graph;
    std::vector<Triple> valid, test;
};

Corpus load_corpus(const RunConfig& rc, const char* command) {
    require(rc.train_path, "train", command);
    require(rc.meta_path, "meta", command);
    Corpus c{build_graph(rc.train_path, load_relation_meta(rc.meta_path)), {}, {}};
    if (!rc.valid_path.empty()) c.valid = map_triples(c.graph, load_triples(rc.valid_path), rc.valid_path, true);
    if (!rc.test_path.empty()) c.test = map_triples(c.graph, load_triples(rc.test_path), rc.test_path, true);
    return c;
}

fs::path sweep_checkpoint(const fs::path& base, double alpha1) {
    fs::path p = base;
    p.replace_filename(base.stem().string() + ".alpha1-" + format_double(alpha1) + base.extension().string());
    return p;
}

void cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    const auto rc = resolve(a.cfg);
    const auto corpus = load_corpus(rc, "train");
    const auto& g = corpus.graph;

    auto progress = [&err](const std::string& prefix) {
        return [&err, prefix](const EpochLog& e) {
            err << prefix << "epoch " << e.epoch << " csm " << fixed(e.mean_csm_loss, 4) << " hm "
                << fixed(e.mean_hm_loss, 4) << " norm " << fixed(e.mean_norm_loss, 4);
            if (e.valid_accuracy) err << " valid " << fixed(*e.valid_accuracy, 4);
            err << '\n';
        };
    };
    auto test_report = [&](const ModelParams& p) {
        return evaluate_prediction(p, g, corpus.test, rc.train.norm, rc.threads);
    };

    if (!a.sweep.empty()) {
        if (a.sweep_out.empty()) throw InputError("--sweep-alpha1 needs --sweep-out");
        std::string csv = "alpha1,epochs_run,best_epoch,valid_accuracy,test_accuracy,test_prop_accuracy,"
                          "test_hier_accuracy\n";
        auto cell = [](bool present, double x) { return present ? format_double(x) : std::string(); };
        for (double alpha1 : parse_list(a.sweep)) {
            TrainConfig cfg = rc.train;
            cfg.alpha1 = alpha1;
            cfg.validate();
            const auto res = train(g, corpus.valid, cfg, progress("alpha1=" + format_double(alpha1) + " "));
            if (!rc.checkpoint_path.empty()) save_checkpoint(res.params, sweep_checkpoint(rc.checkpoint_path, alpha1));
            const bool has_test = !corpus.test.empty();
            const auto rep = has_test ? test_report(res.params) : EvalReport{};
            csv += format_double(alpha1) + "," + std::to_string(res.epochs_run) + "," +
                   std::to_string(res.best_epoch) + "," + cell(!corpus.valid.empty(), res.best_valid_accuracy) + "," +
                   cell(has_test, rep.overall.accuracy()) + "," + cell(has_test && rep.prop.total, rep.prop.accuracy()) +
                   "," + cell(has_test && rep.hier.total, rep.hier.accuracy()) + "\n";
        }
        write_file_atomic(a.sweep_out, csv);
        out << csv;
        return;
    }

    require(rc.checkpoint_path, "checkpoint", "train");
    std::string log;
    const auto show = progress("");
    const auto res = train(g, corpus.valid, rc.train, [&](const EpochLog& e) {
        EpochLog rec = e;
        if (a.deterministic) rec.elapsed_seconds = 0.0;
        log += to_json_line(rec) + "\n";
        show(e);
    });
    save_checkpoint(res.params, rc.checkpoint_path);
    if (!rc.log_path.empty()) write_file_atomic(rc.log_path, log);

    nlohmann::json report{{"config", config_json(rc)},
                          {"trainableParameters", res.params.trainable_count()},
                          {"epochsRun", res.epochs_run},
                          {"bestEpoch", res.best_epoch}};
    if (!corpus.valid.empty()) {
        report["initialValidAccuracy"] = res.initial_valid_accuracy;
        report["bestValidAccuracy"] = res.best_valid_accuracy;
    }
    if (!corpus.test.empty()) report["test"] = to_json(test_report(res.params));
    if (!rc.report_path.empty()) write_json(rc.report_path, report);

    out << "trained " << res.epochs_run << " epochs, kept epoch " << res.best_epoch;
    if (!corpus.valid.empty()) out << " (valid accuracy " << fixed(res.best_valid_accuracy, 4) << ")";
    out << "\ncheckpoint " << rc.checkpoint_path.string() << '\n';
    if (report.contains("test")) out << "test accuracy " << fixed(report["test"]["overallAccuracy"], 4) << '\n';
}

// ---- predict / eval / pr-curve ----------------------------------------------

struct PredictArgs {
    ConfigFlags cfg;
    std::string pairs, out;
};

void cmd_predict(const PredictArgs& a, std::ostream& out) {
    const auto rc = resolve(a.cfg);
    require(rc.checkpoint_path, "checkpoint", "predict");
    if (a.pairs.empty()) throw InputError("predict needs --pairs");
    const auto p = load_checkpoint(rc.checkpoint_path);
    std::unordered_map<std::string, ConceptId> ids;
    for (std::size_t i = 0; i < p.concept_names.size(); ++i) ids.emplace(p.concept_names[i], static_cast<ConceptId>(i));
    auto id_of = [&](const std::string& name) {
        const auto it = ids.find(name);
        if (it == ids.end()) throw InputError(a.pairs + ": unknown concept '" + name + "'");
        return it->second;
    };
    std::string text;
    for (const auto& [s, t] : load_pairs(a.pairs)) {
        const auto pred = predict_relation(p, id_of(s), id_of(t), rc.train.norm);
        text += s + '\t' + p.relation_names[pred.relation] + '\t' + format_double(pred.score) + '\n';
    }
    if (a.out.empty())
        out << text;
    else
        write_file_atomic(a.out, text);
}

struct Scored {
    ModelParams params;
    OntologyGraph registry;
    std::vector<Triple> test;
};

Scored load_scored(const RunConfig& rc, const char* command, bool need_meta, bool need_test) {
    require(rc.checkpoint_path, "checkpoint", command);
    if (need_meta) require(rc.meta_path, "meta", command);
    if (need_test) require(rc.test_path, "test", command);
    auto p = load_checkpoint(rc.checkpoint_path);
    std::optional<std::vector<RelationMeta>> meta;
    if (!rc.meta_path.empty()) meta = load_relation_meta(rc.meta_path);
    auto reg = checkpoint_registry(p, meta ? &*meta : nullptr);
    std::vector<Triple> test;
    if (!rc.test_path.empty()) test = map_triples(reg, load_triples(rc.test_path), rc.test_path, false);
    return {std::move(p), std::move(reg), std::move(test)};
}

struct EvalArgs {
    ConfigFlags cfg;
    bool pr = false;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
    const auto rc = resolve(a.cfg);
    const auto s = load_scored(rc, "eval", true, true);
    auto report = evaluate_prediction(s.params, s.registry, s.test, rc.train.norm, rc.threads);
    if (a.pr) report.pr = pr_curve(s.params, s.test, rc.train.norm, rc.threads);
    auto j = to_json(report);
    j["cases"] = s.test.size();
    if (!rc.report_path.empty()) write_json(rc.report_path, j);
    out << j.dump(2) << '\n';
}

struct PrArgs {
    ConfigFlags cfg;
    std::string out;
};

void cmd_pr_curve(const PrArgs& a, std::ostream& out) {
    const auto rc = resolve(a.cfg);
    if (a.out.empty()) throw InputError("pr-curve needs --out");
    const auto s = load_scored(rc, "pr-curve", false, true);
    const auto curve = pr_curve(s.params, s.test, rc.train.norm, rc.threads);
    write_file_atomic(a.out, pr_csv(curve));
    out << "auc " << format_double(curve.auc) << " over " << s.test.size() << " cases, " << curve.points.size()
        << " points written to " << a.out << '\n';
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
    ConfigFlags cfg;
    std::string cases, cases_out;
    std::optional<double> tau;
    int cv = 0;
};

void cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const auto rc = resolve(a.cfg);
    if (a.cv > 0) {
        const auto corpus = load_corpus(rc, "verify --cv");
        const auto cv = cross_validate_verification(corpus.graph, rc.train, a.cv, rc.train.seed);
        auto j = to_json(cv);
        if (!rc.report_path.empty()) write_json(rc.report_path, j);
        out << j.dump(2) << '\n';
        return;
    }

    const auto s = load_scored(rc, "verify", true, false);
    std::vector<VerificationCase> cases;
    if (!a.cases.empty()) {
        for (const auto& c : load_cases(a.cases)) {
            const auto ids = map_triples(s.registry, std::span(&c.triple, 1), a.cases, false);
            cases.push_back({ids[0], c.positive ? Label::positive : Label::negative, 0.0, Corruption::none});
        }
    } else if (!s.test.empty()) {
        const auto positives = s.registry.with_triples(s.test);
        cases = positive_cases(positives);
        const auto neg = generate_negatives(positives, rc.train.seed);
        cases.insert(cases.end(), neg.begin(), neg.end());
    } else {
        throw InputError("verify needs --cases, --test or --cv");
    }
    if (!a.cases_out.empty()) {
        std::vector<LabelledTriple> named;
        for (const auto& c : cases)
            named.push_back({{s.registry.concept_name(c.triple.source), s.registry.relation(c.triple.relation).name,
                              s.registry.concept_name(c.triple.target), 0},
                             c.label == Label::positive});
        write_file_atomic(a.cases_out, format_cases(named));
    }

    for (auto& c : cases) c.score = dissimilarity(s.params, c.triple, rc.train.norm);
    const double tau = a.tau ? *a.tau : fit_threshold(cases).tau;
    BucketCount overall, prop, hier;
    std::size_t negatives = 0;
    for (const auto& c : cases) {
        const bool hit = (c.score < tau) == (c.label == Label::positive);
        const auto& m = s.registry.relation(c.triple.relation);
        for (auto [on, b] : {std::pair{true, &overall}, std::pair{m.has_property(), &prop},
                             std::pair{m.hierarchical(), &hier}})
            if (on) {
                ++b->total;
                b->correct += hit;
            }
        negatives += c.label == Label::negative;
    }
    nlohmann::json j{{"tau", tau},
                     {"tauFitted", !a.tau},
                     {"cases", cases.size()},
                     {"negatives", negatives},
                     {"accuracy", overall.accuracy()},
                     {"counts", {{"overall", to_json(overall)}, {"prop", to_json(prop)}, {"hier", to_json(hier)}}}};
    if (!rc.report_path.empty()) write_json(rc.report_path, j);
    out << j.dump(2) << '\n';
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ontology relation embeddings: data prep, training, prediction and verification"};
    app.name("on2vec");
    app.require_subcommand(1);

    PrepArgs prep;
    auto* c_prep = app.add_subcommand("prep", "truncate transitive closures and split a triple file");
    c_prep->add_option("--in", prep.in, "triples, source<TAB>relation<TAB>target")->required();
    c_prep->add_option("--meta", prep.meta, "relation flags, name<TAB>flags")->required();
    c_prep->add_option("--out", prep.out, "output directory")->required();
    c_prep->add_option("--max-hops", prep.max_hops, "hop limit for transitive facts")->capture_default_str();
    c_prep->add_option("--split", prep.split, "train,valid,test fractions")->capture_default_str();
    c_prep->add_option("--seed", prep.seed, "split seed")->capture_default_str();

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "generate a synthetic ontology with splits");
    c_synth->add_option("--spec", synth.spec, "generator spec, key=value lines");
    c_synth->add_option("--out", synth.out, "output directory")->required();
    c_synth->add_option("--seed", synth.seed, "generator seed")->capture_default_str();

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "train embeddings with early stopping on the validation set");
    add_config_flags(*c_train, tr.cfg);
    c_train->add_option("--sweep-alpha1", tr.sweep, "comma-separated alpha1 values; one run each");
    c_train->add_option("--sweep-out", tr.sweep_out, "CSV written by --sweep-alpha1");
    c_train->add_flag("--deterministic", tr.deterministic, "write elapsedSeconds as 0 in the epoch log");

    PredictArgs pr;
    auto* c_predict = app.add_subcommand("predict", "lowest-dissimilarity relation for concept pairs");
    add_config_flags(*c_predict, pr.cfg);
    c_predict->add_option("--pairs", pr.pairs, "source<TAB>target per line");
    c_predict->add_option("--out", pr.out, "output file (default: standard output)");

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "relation prediction accuracy on a test file");
    add_config_flags(*c_eval, ev.cfg);
    c_eval->add_flag("--pr", ev.pr, "include the precision-recall curve");

    PrArgs prc;
    auto* c_pr = app.add_subcommand("pr-curve", "precision-recall curve of relation prediction as CSV");
    add_config_flags(*c_pr, prc.cfg);
    c_pr->add_option("--out", prc.out, "CSV path");

    VerifyArgs vf;
    auto* c_verify = app.add_subcommand("verify", "threshold classification of triples as true or false");
    add_config_flags(*c_verify, vf.cfg);
    c_verify->add_option("--cases", vf.cases, "labelled cases, source<TAB>relation<TAB>target<TAB>1|0");
    c_verify->add_option("--cases-out", vf.cases_out, "write the scored case set");
    c_verify->add_option("--tau", vf.tau, "fixed threshold instead of fitting one");
    c_verify->add_option("--cv", vf.cv, "k-fold cross-validation with per-fold retraining");

    auto previous = set_warning_sink([&err](const std::string& m) { err << "warning: " << m << '\n'; });
    struct Restore {
        WarningSink sink;
        ~Restore() { set_warning_sink(std::move(sink)); }
    } restore{std::move(previous)};

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (c_prep->parsed()) cmd_prep(prep, out);
        else if (c_synth->parsed()) cmd_synth(synth, out);
        else if (c_train->parsed()) cmd_train(tr, out, err);
        else if (c_predict->parsed()) cmd_predict(pr, out);
        else if (c_eval->parsed()) cmd_eval(ev, out);
        else if (c_pr->parsed()) cmd_pr_curve(prc, out);
        else if (c_verify->parsed()) cmd_verify(vf, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace on2vec::cli
