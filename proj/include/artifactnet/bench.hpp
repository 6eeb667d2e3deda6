#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace artifactnet::bench {

enum class Label { kAi, kReal };
enum class Origin { kTrain, kTest };
enum class PredStatus { kOk, kMissing, kDecodeError };

struct ManifestEntry {
    std::string id;
    std::string path;
    Label label = Label::kReal;
    std::string generator;  // empty for real tracks
    std::string source_group;
    Origin bench_origin = Origin::kTest;
    std::string subset;
};

struct PredictionRecord {
    std::string id;
    std::vector<double> segment_probs;
    double song_prob = 0.0;  // median of segment probs when status ok
    Label verdict = Label::kReal;
    PredStatus status = PredStatus::kOk;
};

struct MetricsBlock {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0, fpr = 0.0;
    std::optional<double> auc;
    double threshold = 0.5;

    long total() const { return tp + fp + tn + fn; }
};

struct SanityVerdict {
    std::string subset;
    Label label = Label::kAi;
    double rate = 0.0;       // TPR for AI subsets, FPR for real subsets
    double threshold = 0.0;  // the gate applied
    bool pass = false;
};

enum class Accounting { kAExclude, kBImpute };

struct ImputationAccounting {
    Accounting accounting = Accounting::kAExclude;
    long n_total = 0;
    long n_missing = 0;
    MetricsBlock metrics;
};

struct SubsetMetrics {
    std::string subset;
    Label label = Label::kAi;
    MetricsBlock metrics;
};

struct EvalResult {
    MetricsBlock overall;
    std::vector<SubsetMetrics> per_subset;  // sorted by subset name
    long n_missing = 0;
    long n_decode_error = 0;
};

struct RocPoint {
    double tau = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
    double f1 = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points;
    double auc = 0.0;
    // best operating point with FPR <= 5%
    double op_tau = 0.0;
    double op_tpr = 0.0;
    double op_fpr = 0.0;
    bool op_found = false;
};

inline constexpr const char* kReportSchema = "abr-1";
inline constexpr double kDefaultTau = 0.5;
inline constexpr double kAiTprGate = 0.90;
inline constexpr double kStableAudioTprGate = 0.60;
inline constexpr double kRealFprGate = 0.05;

// Manifest and prediction files are UTF-8 JSON lines.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<PredictionRecord> read_predictions(const std::string& path);
void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records);

// Lower median of the segment probabilities; verdict is AI iff median >= tau.
std::pair<double, Label> median_verdict(const std::vector<double>& segment_probs,
                                        double tau = kDefaultTau);

// Confusion counts and derived metrics over status-ok records. Records with
// ids absent from the manifest raise AlignmentError; manifest entries with
// no record count as missing. When test_origin_only is set, entries tagged
// bench_origin=train are ignored.
EvalResult evaluate(const std::vector<ManifestEntry>& manifest,
                    const std::vector<PredictionRecord>& predictions, double tau = kDefaultTau,
                    bool test_origin_only = false);

// Rank-based (Mann-Whitney) AUC with ties credited 0.5.
double auc(const std::vector<double>& scores_ai, const std::vector<double>& scores_real);

// (FPR, TPR, F1) per grid threshold, plus the best TPR at FPR <= 5%.
RocResult roc_sweep(const std::vector<double>& scores, const std::vector<Label>& labels,
                    const std::vector<double>& grid);

// Per-subset PASS/FAIL gates. Stable Audio subsets (matched by
// case-insensitive substring against stable_patterns) use the relaxed TPR
// threshold.
std::vector<SanityVerdict> sanity_protocol(
    const std::vector<SubsetMetrics>& per_subset,
    const std::vector<std::string>& stable_patterns = {"stable_audio", "stable-audio",
                                                       "stable audio"});

// Both imputation accountings for each model. A: metrics on the
// intersection of status-ok ids across models. B: full denominator with
// each model's missing reals imputed as false positives and missing AI as
// false negatives.
std::map<std::string, std::pair<ImputationAccounting, ImputationAccounting>> dual_accounting(
    const std::vector<ManifestEntry>& manifest,
    const std::map<std::string, std::vector<PredictionRecord>>& predictions_by_model,
    double tau = kDefaultTau);

struct BenchReport {
    std::string schema = kReportSchema;
    double tau = kDefaultTau;
    bool test_origin_only = false;
    std::string descriptor_layout;
    EvalResult eval;
    std::vector<SanityVerdict> sanity;
    int sanity_fail_count = 0;
    RocResult roc;
    std::map<std::string, std::pair<ImputationAccounting, ImputationAccounting>> accountings;
};

// Canonical JSON serialization (byte-stable for identical inputs), plus
// plot-ready CSV companions next to it (<stem>_roc.csv, <stem>_subsets.csv).
void emit_report(const BenchReport& report, const std::string& path);
BenchReport parse_report(const std::string& path);

std::string label_to_string(Label l);
Label label_from_string(const std::string& s);

}  // namespace artifactnet::bench
