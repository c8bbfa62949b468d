#include "qag/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qag/errors.hpp"
#include "qag/text.hpp"

namespace qag {

namespace {

std::vector<std::string> sorted_token_set(const QAPair& qa) {
  std::vector<std::string> tokens = normalized_tokens(qa.question + " " + qa.answer_text);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double jaccard_pct(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 100.0;  // two empty sets are identical
  std::vector<std::string> shared;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
  const std::size_t union_size = a.size() + b.size() - shared.size();
  return 100.0 * static_cast<double>(shared.size()) / static_cast<double>(union_size);
}

}  // namespace

double pairwise_overlap(const std::vector<QAPair>& qas) {
  if (qas.size() < 2) {
    throw UndefinedMetric("pairwise overlap needs at least 2 pairs, got " +
                          std::to_string(qas.size()));
  }
  std::vector<std::vector<std::string>> sets;
  sets.reserve(qas.size());
  for (const QAPair& qa : qas) sets.push_back(sorted_token_set(qa));

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      sum += jaccard_pct(sets[i], sets[j]);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double pos_coverage(const Document& doc, const std::vector<QAPair>& qas, int k) {
  std::set<int> touched;
  for (const QAPair& qa : qas) {
    if (!qa.grounded()) continue;
    touched.insert(position_of_answer(doc, *qa.answer_start, k));
  }
  return 100.0 * static_cast<double>(touched.size()) / static_cast<double>(k);
}

double wh_coverage(const std::vector<QAPair>& qas) {
  if (qas.empty()) throw UndefinedMetric("wh coverage needs at least 1 pair");
  std::set<WhType> types;
  for (const QAPair& qa : qas) {
    const WhType t = classify_wh(qa.question);
    if (t != WhType::other) types.insert(t);
  }
  const std::size_t denom = std::min<std::size_t>(qas.size(), kWhPromptable.size());
  return 100.0 * static_cast<double>(types.size()) / static_cast<double>(denom);
}

double ent_coverage(const Document& doc, const std::vector<QAPair>& qas,
                    const EntityTagger& tagger) {
  if (qas.empty()) throw UndefinedMetric("entity coverage needs at least 1 pair");
  const std::vector<EntitySpan> spans = tag_document(doc, tagger);
  std::size_t mentioning = 0;
  for (const QAPair& qa : qas) {
    const std::string text = qa.question + " " + qa.answer_text;
    for (const EntitySpan& span : spans) {
      if (contains_ci(text, span.text)) {
        ++mentioning;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(mentioning) / static_cast<double>(qas.size());
}

AnnotationStats annotation_stats(const Corpus& corpus, int k) {
  AnnotationStats stats;
  std::vector<std::size_t> position_counts(static_cast<std::size_t>(k), 0);
  std::size_t first_half = 0;
  std::map<WhType, std::size_t> wh_counts;
  std::size_t counted = 0;

  for (const Document& doc : corpus.documents) {
    const std::vector<QAPair>* pairs = corpus.pairs_of(doc.id());
    if (pairs == nullptr) continue;
    const bool splittable = doc.token_count() >= static_cast<std::size_t>(k);
    for (const QAPair& qa : *pairs) {
      if (!qa.grounded() || !splittable) {
        ++stats.skipped;
        continue;
      }
      const int pos = position_of_answer(doc, *qa.answer_start, k);
      ++position_counts[static_cast<std::size_t>(pos - 1)];
      if (*qa.answer_start < doc.text().size() / 2) ++first_half;
      ++wh_counts[classify_wh(qa.question)];
      ++counted;
    }
  }
  if (counted == 0) {
    throw UndefinedMetric("annotation statistics need at least one grounded pair");
  }
  stats.n_qas = counted;
  stats.per_position_fraction.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < position_counts.size(); ++i) {
    stats.per_position_fraction[i] =
        static_cast<double>(position_counts[i]) / static_cast<double>(counted);
  }
  stats.first_half_fraction = static_cast<double>(first_half) / static_cast<double>(counted);
  for (WhType t : kWhCanonical) {
    stats.wh_distribution[t] =
        static_cast<double>(wh_counts[t]) / static_cast<double>(counted);
  }
  return stats;
}

std::vector<DiversityReport> diversity_report(
    const std::vector<std::pair<std::string, std::vector<GenerationResult>>>& by_strategy,
    const Corpus& docs, const EntityTagger& tagger, const ReportOptions& options,
    std::vector<DocumentDetail>* detail) {
  std::vector<DiversityReport> reports;

  for (const auto& [strategy, results] : by_strategy) {
    // Group pairs and latency per document, preserving schedule order.
    std::vector<std::string> doc_order;
    std::map<std::string, std::vector<QAPair>> pairs_by_doc;
    std::map<std::string, double> latency_by_doc;
    std::map<std::string, std::size_t> raw_pair_count;
    for (const GenerationResult& r : results) {
      if (pairs_by_doc.try_emplace(r.doc_id).second) doc_order.push_back(r.doc_id);
      auto& list = pairs_by_doc[r.doc_id];
      for (const QAPair& qa : r.parsed) {
        ++raw_pair_count[r.doc_id];
        if (list.size() < static_cast<std::size_t>(options.first_n)) list.push_back(qa);
      }
      latency_by_doc[r.doc_id] += r.latency_ms;
    }

    DiversityReport report;
    report.strategy = strategy;
    double overlap_sum = 0.0, pos_sum = 0.0, wh_sum = 0.0, ent_sum = 0.0, time_sum = 0.0;
    std::size_t overlap_docs = 0, covered_docs = 0, timed_docs = 0;

    for (const std::string& doc_id : doc_order) {
      const std::vector<QAPair>& selected = pairs_by_doc[doc_id];
      if (selected.empty()) continue;
      const Document* doc = docs.find_document(doc_id);
      if (doc == nullptr) continue;

      DocumentDetail d;
      d.strategy = strategy;
      d.doc_id = doc_id;
      d.n_pairs = selected.size();
      ++report.n_documents;
      report.n_pairs += selected.size();

      if (selected.size() >= 2) {
        d.overlap_pct = pairwise_overlap(selected);
        overlap_sum += d.overlap_pct;
        ++overlap_docs;
      }
      if (doc->token_count() >= static_cast<std::size_t>(options.k)) {
        d.pos_coverage_pct = pos_coverage(*doc, selected, options.k);
        d.wh_coverage_pct = wh_coverage(selected);
        d.ent_coverage_pct = ent_coverage(*doc, selected, tagger);
        pos_sum += d.pos_coverage_pct;
        wh_sum += d.wh_coverage_pct;
        ent_sum += d.ent_coverage_pct;
        ++covered_docs;
      }
      d.time_ms_per_5 = latency_by_doc[doc_id] /
                        static_cast<double>(raw_pair_count[doc_id]) * 5.0;
      time_sum += d.time_ms_per_5;
      ++timed_docs;

      if (detail != nullptr) detail->push_back(d);
    }

    if (overlap_docs == 0) continue;  // nothing measurable for this strategy
    report.overlap_pct = overlap_sum / static_cast<double>(overlap_docs);
    if (covered_docs > 0) {
      report.pos_coverage_pct = pos_sum / static_cast<double>(covered_docs);
      report.wh_coverage_pct = wh_sum / static_cast<double>(covered_docs);
      report.ent_coverage_pct = ent_sum / static_cast<double>(covered_docs);
    }
    if (timed_docs > 0) report.avg_time_ms_per_5 = time_sum / static_cast<double>(timed_docs);
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_report_csv(const std::vector<DiversityReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  out << "# overlap = mean pairwise Jaccard over lowercased punctuation-stripped tokens of "
         "question+answer; pos/wh/ent coverage = declared substitute formulas (splits touched / "
         "k, distinct WH / min(n,7), pairs mentioning a document entity / n)\n";
  out << "strategy,overlap_pct,pos_coverage_pct,wh_coverage_pct,ent_coverage_pct,"
         "avg_time_ms_per_5,n_documents,n_pairs\n";
  out << std::fixed;
  out.precision(2);
  for (const DiversityReport& r : reports) {
    out << r.strategy << ',' << r.overlap_pct << ',' << r.pos_coverage_pct << ','
        << r.wh_coverage_pct << ',' << r.ent_coverage_pct << ',' << r.avg_time_ms_per_5 << ','
        << r.n_documents << ',' << r.n_pairs << "\n";
  }
  if (!out) throw ExportError("failed writing '" + path + "'");
}

void write_report_detail_json(const std::vector<DocumentDetail>& detail,
                              const std::string& path) {
  nlohmann::ordered_json root = nlohmann::ordered_json::array();
  for (const DocumentDetail& d : detail) {
    nlohmann::ordered_json row;
    row["strategy"] = d.strategy;
    row["doc_id"] = d.doc_id;
    row["n_pairs"] = d.n_pairs;
    if (d.overlap_pct >= 0) row["overlap_pct"] = d.overlap_pct;
    if (d.pos_coverage_pct >= 0) row["pos_coverage_pct"] = d.pos_coverage_pct;
    if (d.wh_coverage_pct >= 0) row["wh_coverage_pct"] = d.wh_coverage_pct;
    if (d.ent_coverage_pct >= 0) row["ent_coverage_pct"] = d.ent_coverage_pct;
    row["time_ms_per_5"] = d.time_ms_per_5;
    root.push_back(std::move(row));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  out << root.dump(2) << "\n";
  if (!out) throw ExportError("failed writing '" + path + "'");
}

}  // namespace qag
