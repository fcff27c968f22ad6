#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stutterbias/corpus.hpp"
#include "stutterbias/stats.hpp"

namespace stutterbias {

struct SpectrogramParams {
  double window_s = 0.025;
  double hop_s = 0.010;
  std::size_t mel_bands = 80;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-10;
  std::size_t fft_size = 0;  // 0 selects the next power of two >= window

  // Rate-independent checks; fmax is checked against the audio rate later.
  void validate() const;
  void validate(int sample_rate) const;
  std::size_t window_samples(int sample_rate) const;
  std::size_t hop_samples(int sample_rate) const;
  std::size_t fft_samples(int sample_rate) const;
};

SpectrogramParams spectrogram_params_from_json(const nlohmann::json& j);
nlohmann::json spectrogram_params_to_json(const SpectrogramParams& p);

// Row-major frames x bands.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

double hz_to_mel(double hz);  // 2595 log10(1 + hz / 700)
double mel_to_hz(double mel);

// Triangular HTK filters on mel-spaced edges. Band b rises from lower_hz[b]
// to center_hz[b] and falls to upper_hz[b]; weights are evaluated at the FFT
// bin frequencies k * sample_rate / fft_size.
struct MelFilterbank {
  std::vector<double> lower_hz;
  std::vector<double> center_hz;
  std::vector<double> upper_hz;
  Matrix weights;  // bands x (fft_size / 2 + 1)
};

MelFilterbank mel_filterbank(const SpectrogramParams& params, int sample_rate);

// Hann-windowed magnitude STFT, mel filterbank, then log(v + log_floor).
// Frame count is floor((len - window) / hop) + 1.
Matrix log_mel_spectrogram(const AudioBuffer& audio, const SpectrogramParams& params);

// Per-band mean over frames.
std::vector<double> pooled_embedding(const Matrix& spectrogram);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct SimilarityRow {
  std::string label;  // report label of a disfluency type, or "All"
  std::optional<stats::Summary> summary;  // empty when A has no clip of the type
};

// Mean and population sd of the cosine between pooled embeddings over A x B,
// one row per disfluency type of the A-side utterance in report order, then
// "All" over every pair. A's types come from provenance.plans.<id>.type;
// utterances without a recorded type count toward "All" only.
std::vector<SimilarityRow> cross_dataset_similarity(const Manifest& a, const Manifest& b,
                                                    const SpectrogramParams& params,
                                                    std::size_t parallelism = 1);

// Eight type rows plus "All" with a (mu, sigma) column pair per comparison set.
std::string similarity_report_csv(const std::vector<SimilarityRow>& first,
                                  const std::string& first_name,
                                  const std::vector<SimilarityRow>& second,
                                  const std::string& second_name);

}  // namespace stutterbias
