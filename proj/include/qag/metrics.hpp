#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qag/conditions.hpp"
#include "qag/corpus.hpp"
#include "qag/generation.hpp"

namespace qag {

// Per-strategy aggregate row (overlap, coverage, timing).
struct DiversityReport {
  std::string strategy;
  double overlap_pct = 0.0;
  double pos_coverage_pct = 0.0;
  double wh_coverage_pct = 0.0;
  double ent_coverage_pct = 0.0;
  double avg_time_ms_per_5 = 0.0;
  std::size_t n_documents = 0;  // documents contributing >= 1 parsed pair
  std::size_t n_pairs = 0;      // pairs entering the metrics (after first-n selection)
};

struct AnnotationStats {
  std::vector<double> per_position_fraction;  // k entries (5 by default)
  double first_half_fraction = 0.0;
  std::map<WhType, double> wh_distribution;
  std::size_t n_qas = 0;    // pairs entering the statistics
  std::size_t skipped = 0;  // ungrounded or degenerate-document pairs
};

// Mean over all unordered pairs of 100 * |T(a) n T(b)| / |T(a) u T(b)| where
// T(x) is the set of lowercased punctuation-stripped tokens of question +
// answer. Declared substitute: the source analysis never defines "overlap";
// Jaccard is symmetric, bounded and standard. Throws UndefinedMetric when
// fewer than 2 pairs.
double pairwise_overlap(const std::vector<QAPair>& qas);

// 100 * |distinct splits holding >= 1 answer_start| / k. Ungrounded pairs
// contribute nothing.
double pos_coverage(const Document& doc, const std::vector<QAPair>& qas, int k = 5);

// 100 * |distinct WH types among the questions, excluding "other"| /
// min(|qas|, 7). Throws UndefinedMetric on an empty list.
double wh_coverage(const std::vector<QAPair>& qas);

// 100 * |pairs whose question+answer text contains >= 1 document entity
// span, case-insensitively| / |qas|. Throws UndefinedMetric on an empty list.
double ent_coverage(const Document& doc, const std::vector<QAPair>& qas,
                    const EntityTagger& tagger);

// Annotator-artifact statistics over a grounded corpus: per-position
// fractions, the fraction of answers starting in the first half of the
// document's char length, and the WH-type distribution. Ungrounded pairs and
// pairs of documents too short to split are skipped and counted. Throws
// UndefinedMetric when nothing remains.
AnnotationStats annotation_stats(const Corpus& corpus, int k = 5);

struct ReportOptions {
  int first_n = 5;  // pairs per document entering the metrics, schedule order
  int k = 5;
};

// Per-document breakdown behind a report row.
struct DocumentDetail {
  std::string strategy;
  std::string doc_id;
  std::size_t n_pairs = 0;
  double overlap_pct = -1.0;  // -1 when undefined (fewer than 2 pairs)
  double pos_coverage_pct = -1.0;
  double wh_coverage_pct = -1.0;
  double ent_coverage_pct = -1.0;
  double time_ms_per_5 = 0.0;
};

// Aggregates per-strategy generations into report rows. Per document, the
// first first_n parsed pairs in schedule order are measured; documents with
// fewer than 2 pairs are excluded from the overlap mean (counted in detail).
// Strategies without any document holding >= 2 pairs are omitted.
std::vector<DiversityReport> diversity_report(
    const std::vector<std::pair<std::string, std::vector<GenerationResult>>>& by_strategy,
    const Corpus& docs, const EntityTagger& tagger, const ReportOptions& options = {},
    std::vector<DocumentDetail>* detail = nullptr);

// CSV, one row per strategy in input order; the leading '#' header line
// names the substitute overlap/coverage definitions.
void write_report_csv(const std::vector<DiversityReport>& reports, const std::string& path);

void write_report_detail_json(const std::vector<DocumentDetail>& detail, const std::string& path);

}  // namespace qag
