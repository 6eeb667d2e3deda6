#include "artifactnet/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "artifactnet/errors.hpp"

namespace artifactnet::bench {

using nlohmann::ordered_json;

std::string label_to_string(Label l) { return l == Label::kAi ? "ai" : "real"; }

Label label_from_string(const std::string& s) {
    if (s == "ai") return Label::kAi;
    if (s == "real") return Label::kReal;
    throw FormatError("unknown label '" + s + "' (expected ai|real)");
}

namespace {

std::string origin_to_string(Origin o) { return o == Origin::kTrain ? "train" : "test"; }

Origin origin_from_string(const std::string& s) {
    if (s == "train") return Origin::kTrain;
    if (s == "test") return Origin::kTest;
    throw FormatError("unknown bench_origin '" + s + "' (expected train|test)");
}

std::string status_to_string(PredStatus s) {
    switch (s) {
        case PredStatus::kOk: return "ok";
        case PredStatus::kMissing: return "missing";
        default: return "decode_error";
    }
}

PredStatus status_from_string(const std::string& s) {
    if (s == "ok") return PredStatus::kOk;
    if (s == "missing") return PredStatus::kMissing;
    if (s == "decode_error") return PredStatus::kDecodeError;
    throw FormatError("unknown prediction status '" + s + "'");
}

void fill_derived(MetricsBlock& m) {
    const double tp = static_cast<double>(m.tp), fp = static_cast<double>(m.fp);
    const double tn = static_cast<double>(m.tn), fn = static_cast<double>(m.fn);
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.fpr = fp + tn > 0 ? fp / (fp + tn) : 0.0;
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    std::vector<ManifestEntry> out;
    std::set<std::string> seen;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw FormatError("manifest " + path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        ManifestEntry e;
        e.id = j.at("id").get<std::string>();
        e.path = j.value("path", "");
        e.label = label_from_string(j.at("label").get<std::string>());
        e.generator = j.value("generator", "");
        e.source_group = j.value("source_group", "");
        e.bench_origin = origin_from_string(j.value("bench_origin", "test"));
        e.subset = j.value("subset", "");
        if (!seen.insert(e.id).second) {
            throw FormatError("duplicate manifest id '" + e.id + "' in " + path);
        }
        out.push_back(std::move(e));
    }
    return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& e : entries) {
        ordered_json j;
        j["id"] = e.id;
        j["path"] = e.path;
        j["label"] = label_to_string(e.label);
        j["generator"] = e.generator;
        j["source_group"] = e.source_group;
        j["bench_origin"] = origin_to_string(e.bench_origin);
        j["subset"] = e.subset;
        out << j.dump() << "\n";
    }
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open predictions: " + path);
    std::vector<PredictionRecord> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw FormatError("predictions " + path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        PredictionRecord r;
        r.id = j.at("id").get<std::string>();
        r.status = status_from_string(j.value("status", "ok"));
        if (j.contains("segment_probs")) {
            r.segment_probs = j["segment_probs"].get<std::vector<double>>();
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& r : records) {
        ordered_json j;
        j["id"] = r.id;
        j["segment_probs"] = r.segment_probs;
        j["status"] = status_to_string(r.status);
        out << j.dump() << "\n";
    }
}

std::pair<double, Label> median_verdict(const std::vector<double>& segment_probs, double tau) {
    if (segment_probs.empty()) throw NoSegmentsError("median_verdict on empty segment list");
    std::vector<double> sorted = segment_probs;
    std::sort(sorted.begin(), sorted.end());
    // lower median: exact order statistic, no interpolation for even counts
    const double med = sorted[(sorted.size() - 1) / 2];
    return {med, med >= tau ? Label::kAi : Label::kReal};
}

EvalResult evaluate(const std::vector<ManifestEntry>& manifest,
                    const std::vector<PredictionRecord>& predictions, double tau,
                    bool test_origin_only) {
    std::map<std::string, const ManifestEntry*> by_id;
    for (const auto& e : manifest) by_id.emplace(e.id, &e);

    std::map<std::string, const PredictionRecord*> preds;
    for (const auto& p : predictions) {
        if (!by_id.count(p.id)) throw AlignmentError("prediction id '" + p.id + "' not in manifest");
        preds[p.id] = &p;
    }

    EvalResult result;
    result.overall.threshold = tau;
    std::map<std::string, SubsetMetrics> subsets;
    std::vector<double> probs_ai, probs_real;

    for (const auto& e : manifest) {
        if (test_origin_only && e.bench_origin != Origin::kTest) continue;
        const auto it = preds.find(e.id);
        if (it == preds.end() || it->second->status == PredStatus::kMissing) {
            ++result.n_missing;
            continue;
        }
        if (it->second->status == PredStatus::kDecodeError) {
            ++result.n_decode_error;
            continue;
        }
        const auto [prob, verdict] = median_verdict(it->second->segment_probs, tau);
        (e.label == Label::kAi ? probs_ai : probs_real).push_back(prob);

        auto& sub = subsets[e.subset];
        sub.subset = e.subset;
        sub.label = e.label;
        sub.metrics.threshold = tau;
        if (e.label == Label::kAi) {
            if (verdict == Label::kAi) {
                ++result.overall.tp;
                ++sub.metrics.tp;
            } else {
                ++result.overall.fn;
                ++sub.metrics.fn;
            }
        } else {
            if (verdict == Label::kAi) {
                ++result.overall.fp;
                ++sub.metrics.fp;
            } else {
                ++result.overall.tn;
                ++sub.metrics.tn;
            }
        }
    }

    fill_derived(result.overall);
    if (!probs_ai.empty() && !probs_real.empty()) result.overall.auc = auc(probs_ai, probs_real);
    for (auto& [name, sub] : subsets) {
        fill_derived(sub.metrics);
        result.per_subset.push_back(sub);
    }
    return result;
}

double auc(const std::vector<double>& scores_ai, const std::vector<double>& scores_real) {
    if (scores_ai.empty() || scores_real.empty()) {
        throw UndefinedAucError("auc needs at least one score in each class");
    }
    struct Tagged {
        double score;
        bool ai;
    };
    std::vector<Tagged> all;
    all.reserve(scores_ai.size() + scores_real.size());
    for (double s : scores_ai) all.push_back({s, true});
    for (double s : scores_real) all.push_back({s, false});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.score < b.score; });

    // midranks over tie groups, then the Mann-Whitney statistic
    double rank_sum_ai = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].ai) rank_sum_ai += midrank;
        }
        i = j;
    }
    const double n1 = static_cast<double>(scores_ai.size());
    const double n2 = static_cast<double>(scores_real.size());
    return (rank_sum_ai - n1 * (n1 + 1.0) / 2.0) / (n1 * n2);
}

RocResult roc_sweep(const std::vector<double>& scores, const std::vector<Label>& labels,
                    const std::vector<double>& grid) {
    if (scores.size() != labels.size()) throw ShapeError("roc_sweep: scores/labels size mismatch");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("roc_sweep: grid must be ascending");

    std::vector<double> ai, real;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        (labels[i] == Label::kAi ? ai : real).push_back(scores[i]);
    }

    RocResult out;
    for (double tau : grid) {
        long tp = 0, fn = 0, fp = 0, tn = 0;
        for (double s : ai) (s >= tau ? tp : fn)++;
        for (double s : real) (s >= tau ? fp : tn)++;
        RocPoint p;
        p.tau = tau;
        p.tpr = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        p.fpr = fp + tn > 0 ? static_cast<double>(fp) / (fp + tn) : 0.0;
        const double prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        p.f1 = prec + p.tpr > 0 ? 2.0 * prec * p.tpr / (prec + p.tpr) : 0.0;
        out.points.push_back(p);

        if (p.fpr <= kRealFprGate) {
            if (!out.op_found || p.tpr > out.op_tpr) {
                out.op_found = true;
                out.op_tau = tau;
                out.op_tpr = p.tpr;
                out.op_fpr = p.fpr;
            }
        }
    }
    if (!ai.empty() && !real.empty()) out.auc = auc(ai, real);
    return out;
}

std::vector<SanityVerdict> sanity_protocol(const std::vector<SubsetMetrics>& per_subset,
                                           const std::vector<std::string>& stable_patterns) {
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return s;
    };

    std::vector<SanityVerdict> out;
    for (const auto& sub : per_subset) {
        const bool has_ai = sub.metrics.tp + sub.metrics.fn > 0;
        const bool has_real = sub.metrics.fp + sub.metrics.tn > 0;
        if (has_ai == has_real) {
            throw ConfigError("subset '" + sub.subset + "' is not cleanly tagged ai or real");
        }
        SanityVerdict v;
        v.subset = sub.subset;
        if (has_ai) {
            v.label = Label::kAi;
            v.rate = sub.metrics.recall;
            const std::string name = lower(sub.subset);
            bool stable = false;
            for (const auto& pat : stable_patterns) {
                if (name.find(lower(pat)) != std::string::npos) {
                    stable = true;
                    break;
                }
            }
            v.threshold = stable ? kStableAudioTprGate : kAiTprGate;
            v.pass = v.rate >= v.threshold;
        } else {
            v.label = Label::kReal;
            v.rate = sub.metrics.fpr;
            v.threshold = kRealFprGate;
            v.pass = v.rate <= v.threshold;
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::map<std::string, std::pair<ImputationAccounting, ImputationAccounting>> dual_accounting(
    const std::vector<ManifestEntry>& manifest,
    const std::map<std::string, std::vector<PredictionRecord>>& predictions_by_model, double tau) {
    // intersection of status-ok ids across every model
    std::set<std::string> ok_intersection;
    bool first = true;
    for (const auto& [model, preds] : predictions_by_model) {
        std::set<std::string> ok_ids;
        for (const auto& p : preds) {
            if (p.status == PredStatus::kOk) ok_ids.insert(p.id);
        }
        if (first) {
            ok_intersection = std::move(ok_ids);
            first = false;
        } else {
            std::set<std::string> merged;
            std::set_intersection(ok_intersection.begin(), ok_intersection.end(), ok_ids.begin(),
                                  ok_ids.end(), std::inserter(merged, merged.begin()));
            ok_intersection = std::move(merged);
        }
    }

    std::map<std::string, std::pair<ImputationAccounting, ImputationAccounting>> out;
    for (const auto& [model, preds] : predictions_by_model) {
        std::map<std::string, const PredictionRecord*> by_id;
        for (const auto& p : preds) by_id[p.id] = &p;

        ImputationAccounting a;
        a.accounting = Accounting::kAExclude;
        ImputationAccounting b;
        b.accounting = Accounting::kBImpute;
        a.metrics.threshold = tau;
        b.metrics.threshold = tau;

        for (const auto& e : manifest) {
            const auto it = by_id.find(e.id);
            const bool ok = it != by_id.end() && it->second->status == PredStatus::kOk;

            if (ok && ok_intersection.count(e.id)) {
                const auto [prob, verdict] = median_verdict(it->second->segment_probs, tau);
                (void)prob;
                if (e.label == Label::kAi) {
                    verdict == Label::kAi ? ++a.metrics.tp : ++a.metrics.fn;
                } else {
                    verdict == Label::kAi ? ++a.metrics.fp : ++a.metrics.tn;
                }
                ++a.n_total;
            }

            ++b.n_total;
            if (ok) {
                const auto [prob, verdict] = median_verdict(it->second->segment_probs, tau);
                (void)prob;
                if (e.label == Label::kAi) {
                    verdict == Label::kAi ? ++b.metrics.tp : ++b.metrics.fn;
                } else {
                    verdict == Label::kAi ? ++b.metrics.fp : ++b.metrics.tn;
                }
            } else {
                // impute: missing real counts against FPR, missing AI against recall
                ++b.n_missing;
                if (e.label == Label::kReal) {
                    ++b.metrics.fp;
                } else {
                    ++b.metrics.fn;
                }
            }
        }
        a.n_missing = b.n_missing;
        fill_derived(a.metrics);
        fill_derived(b.metrics);
        out.emplace(model, std::make_pair(a, b));
    }
    return out;
}

namespace {

ordered_json metrics_to_json(const MetricsBlock& m) {
    ordered_json j;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["fpr"] = m.fpr;
    j["threshold"] = m.threshold;
    if (m.auc) j["auc"] = *m.auc;
    return j;
}

MetricsBlock metrics_from_json(const ordered_json& j) {
    MetricsBlock m;
    m.tp = j.at("tp").get<long>();
    m.fp = j.at("fp").get<long>();
    m.tn = j.at("tn").get<long>();
    m.fn = j.at("fn").get<long>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.fpr = j.at("fpr").get<double>();
    m.threshold = j.at("threshold").get<double>();
    if (j.contains("auc")) m.auc = j["auc"].get<double>();
    return m;
}

ordered_json accounting_to_json(const ImputationAccounting& a) {
    ordered_json j;
    j["accounting"] = a.accounting == Accounting::kAExclude ? "A_exclude" : "B_impute";
    j["n_total"] = a.n_total;
    j["n_missing"] = a.n_missing;
    j["metrics"] = metrics_to_json(a.metrics);
    return j;
}

ImputationAccounting accounting_from_json(const ordered_json& j) {
    ImputationAccounting a;
    a.accounting =
        j.at("accounting").get<std::string>() == "A_exclude" ? Accounting::kAExclude : Accounting::kBImpute;
    a.n_total = j.at("n_total").get<long>();
    a.n_missing = j.at("n_missing").get<long>();
    a.metrics = metrics_from_json(j.at("metrics"));
    return a;
}

}  // namespace

void emit_report(const BenchReport& report, const std::string& path) {
    ordered_json j;
    j["schema"] = report.schema;
    j["config"]["tau"] = report.tau;
    j["config"]["test_origin_only"] = report.test_origin_only;
    j["config"]["descriptor_layout"] = report.descriptor_layout;
    j["metrics"] = metrics_to_json(report.eval.overall);
    j["n_missing"] = report.eval.n_missing;
    j["n_decode_error"] = report.eval.n_decode_error;

    j["per_subset"] = ordered_json::array();
    for (const auto& sub : report.eval.per_subset) {
        ordered_json s;
        s["subset"] = sub.subset;
        s["label"] = label_to_string(sub.label);
        s["metrics"] = metrics_to_json(sub.metrics);
        j["per_subset"].push_back(s);
    }

    j["sanity"] = ordered_json::array();
    for (const auto& v : report.sanity) {
        ordered_json s;
        s["subset"] = v.subset;
        s["label"] = label_to_string(v.label);
        s["rate"] = v.rate;
        s["threshold"] = v.threshold;
        s["result"] = v.pass ? "PASS" : "FAIL";
        j["sanity"].push_back(s);
    }
    j["sanity_fail_count"] = report.sanity_fail_count;

    j["roc"]["points"] = ordered_json::array();
    for (const auto& p : report.roc.points) {
        ordered_json s;
        s["tau"] = p.tau;
        s["fpr"] = p.fpr;
        s["tpr"] = p.tpr;
        s["f1"] = p.f1;
        j["roc"]["points"].push_back(s);
    }
    j["roc"]["auc"] = report.roc.auc;
    j["roc"]["operating_point"]["found"] = report.roc.op_found;
    j["roc"]["operating_point"]["tau"] = report.roc.op_tau;
    j["roc"]["operating_point"]["tpr"] = report.roc.op_tpr;
    j["roc"]["operating_point"]["fpr"] = report.roc.op_fpr;

    j["accountings"] = ordered_json::object();
    for (const auto& [model, pair] : report.accountings) {
        j["accountings"][model]["A"] = accounting_to_json(pair.first);
        j["accountings"][model]["B"] = accounting_to_json(pair.second);
    }
    // the AI-side imputation rule in accounting B extends Appendix-style
    // real-side imputation symmetrically
    j["notes"] = ordered_json::array({"accounting B imputes missing AI tracks as false negatives"});

    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("short write: " + path);

    // CSV companions
    const std::string stem = path.substr(0, path.find_last_of('.') == std::string::npos
                                                ? path.size()
                                                : path.find_last_of('.'));
    {
        std::ofstream csv(stem + "_roc.csv");
        csv << "tau,fpr,tpr,f1\n";
        for (const auto& p : report.roc.points) {
            csv << p.tau << "," << p.fpr << "," << p.tpr << "," << p.f1 << "\n";
        }
    }
    {
        std::ofstream csv(stem + "_subsets.csv");
        csv << "subset,label,tp,fp,tn,fn,precision,recall,f1,fpr\n";
        for (const auto& sub : report.eval.per_subset) {
            const auto& m = sub.metrics;
            csv << sub.subset << "," << label_to_string(sub.label) << "," << m.tp << "," << m.fp
                << "," << m.tn << "," << m.fn << "," << m.precision << "," << m.recall << ","
                << m.f1 << "," << m.fpr << "\n";
        }
    }
}

BenchReport parse_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw FormatError("report " + path + ": " + e.what());
    }
    BenchReport r;
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != kReportSchema) throw FormatError("unknown report schema '" + r.schema + "'");
    r.tau = j.at("config").at("tau").get<double>();
    r.test_origin_only = j.at("config").at("test_origin_only").get<bool>();
    r.descriptor_layout = j.at("config").at("descriptor_layout").get<std::string>();
    r.eval.overall = metrics_from_json(j.at("metrics"));
    r.eval.n_missing = j.at("n_missing").get<long>();
    r.eval.n_decode_error = j.at("n_decode_error").get<long>();
    for (const auto& s : j.at("per_subset")) {
        SubsetMetrics sub;
        sub.subset = s.at("subset").get<std::string>();
        sub.label = label_from_string(s.at("label").get<std::string>());
        sub.metrics = metrics_from_json(s.at("metrics"));
        r.eval.per_subset.push_back(std::move(sub));
    }
    for (const auto& s : j.at("sanity")) {
        SanityVerdict v;
        v.subset = s.at("subset").get<std::string>();
        v.label = label_from_string(s.at("label").get<std::string>());
        v.rate = s.at("rate").get<double>();
        v.threshold = s.at("threshold").get<double>();
        v.pass = s.at("result").get<std::string>() == "PASS";
        r.sanity.push_back(std::move(v));
    }
    r.sanity_fail_count = j.at("sanity_fail_count").get<int>();
    for (const auto& p : j.at("roc").at("points")) {
        RocPoint pt;
        pt.tau = p.at("tau").get<double>();
        pt.fpr = p.at("fpr").get<double>();
        pt.tpr = p.at("tpr").get<double>();
        pt.f1 = p.at("f1").get<double>();
        r.roc.points.push_back(pt);
    }
    r.roc.auc = j.at("roc").at("auc").get<double>();
    r.roc.op_found = j.at("roc").at("operating_point").at("found").get<bool>();
    r.roc.op_tau = j.at("roc").at("operating_point").at("tau").get<double>();
    r.roc.op_tpr = j.at("roc").at("operating_point").at("tpr").get<double>();
    r.roc.op_fpr = j.at("roc").at("operating_point").at("fpr").get<double>();
    if (j.contains("accountings")) {
        for (auto it = j["accountings"].begin(); it != j["accountings"].end(); ++it) {
            r.accountings[it.key()] = {accounting_from_json(it.value().at("A")),
                                       accounting_from_json(it.value().at("B"))};
        }
    }
    return r;
}

}  // namespace artifactnet::bench
