#pragma once

#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/format.hpp"
#include "gradfeat/io/image_io.hpp"
#include "gradfeat/io/manifest.hpp"
#include "gradfeat/iqa/logistic_fit.hpp"
#include "gradfeat/iqa/metrics.hpp"
#include "gradfeat/iqa/score.hpp"
#include "gradfeat/models/sae.hpp"
#include "gradfeat/train/zca.hpp"

namespace gradfeat {

struct EvalMetrics {
  double plcc = 0.0;
  double srcc = 0.0;
  double krcc = 0.0;
  double rmse = 0.0;
  double outlier_ratio = 0.0;
};

struct EvalRow {
  std::string image_id;
  double raw_score = 0.0;
  double mapped_score = 0.0;
};

struct EvalResult {
  std::vector<EvalRow> rows;
  EvalMetrics metrics;
  LogisticFit fit;
};

// Scores every test record carrying a reference and a subjective score.
// Rank metrics come from the raw scores; the logistic mapping feeds the
// value metrics, following the usual full-reference evaluation convention.
inline EvalResult iqa_evaluate(const SaeModel& model, const ZcaTransform& zca,
                               const DatasetManifest& manifest,
                               const IqaConfig& cfg = {}) {
  std::vector<ManifestRecord> records;
  for (const ManifestRecord& r : manifest.records) {
    if (r.role == "test" && r.is_iqa()) records.push_back(r);
  }
  if (records.size() < 5) {
    throw DomainError("iqa eval: need at least 5 scored test records, got " +
                      std::to_string(records.size()));
  }

  EvalResult result;
  std::vector<double> raw, subjective;
  bool all_have_std = true;
  std::vector<double> per_item_std;
  for (const ManifestRecord& r : records) {
    const Tensor ref = load_image(manifest.resolve(*r.reference_path));
    const Tensor dist = load_image(manifest.resolve(r.image_path));
    const double score = iqa_score(model, zca, ref, dist, cfg);
    raw.push_back(score);
    subjective.push_back(*r.subjective_score);
    if (r.subjective_std.has_value()) {
      per_item_std.push_back(*r.subjective_std);
    } else {
      all_have_std = false;
    }
    result.rows.push_back({r.image_path, score, 0.0});
  }

  result.fit = logistic_fit(raw, subjective);
  std::vector<double> mapped(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    mapped[i] = result.fit.apply(raw[i]);
    result.rows[i].mapped_score = mapped[i];
  }

  result.metrics.srcc = spearman(raw, subjective);
  result.metrics.krcc = kendall(raw, subjective);
  result.metrics.plcc = pearson(mapped, subjective);
  result.metrics.rmse = rmse(mapped, subjective);
  result.metrics.outlier_ratio =
      all_have_std ? outlier_ratio(mapped, subjective, per_item_std)
                   : outlier_ratio(mapped, subjective);
  return result;
}

inline std::string eval_rows_csv(const std::vector<EvalRow>& rows) {
  std::string out = "image_id,raw_score,mapped_score\n";
  for (const EvalRow& r : rows) {
    out += r.image_id + "," + format_double(r.raw_score) + "," +
           format_double(r.mapped_score) + "\n";
  }
  return out;
}

}  // namespace gradfeat
