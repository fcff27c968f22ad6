#include "stutterbias/similarity.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <fftw3.h>
#include <fmt/format.h>

#include "stutterbias/disfluency_plan.hpp"
#include "stutterbias/parallel.hpp"

namespace stutterbias {

using nlohmann::json;

void SpectrogramParams::validate() const {
  if (!(hop_s > 0.0)) throw Error("spectrogram hop must be positive");
  if (!(window_s >= hop_s)) throw Error("spectrogram window must be at least the hop");
  if (mel_bands == 0) throw Error("spectrogram needs at least one mel band");
  if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz)) throw Error("spectrogram needs 0 <= fmin < fmax");
  if (!(log_floor > 0.0)) throw Error("spectrogram log floor must be positive");
}

void SpectrogramParams::validate(int sample_rate) const {
  validate();
  if (sample_rate <= 0) throw Error("sample rate must be positive");
  if (fmax_hz > sample_rate / 2.0) {
    throw Error(fmt::format("fmax {} Hz exceeds Nyquist {} Hz", fmax_hz, sample_rate / 2.0));
  }
  if (fft_size != 0 && fft_size < window_samples(sample_rate)) {
    throw Error("fft size is shorter than the window");
  }
}

std::size_t SpectrogramParams::window_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(window_s * sample_rate));
}

std::size_t SpectrogramParams::hop_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(hop_s * sample_rate));
}

std::size_t SpectrogramParams::fft_samples(int sample_rate) const {
  if (fft_size != 0) return fft_size;
  std::size_t n = 1;
  while (n < window_samples(sample_rate)) n <<= 1;
  return n;
}

SpectrogramParams spectrogram_params_from_json(const json& j) {
  SpectrogramParams p;
  try {
    p.window_s = j.value("window_s", p.window_s);
    p.hop_s = j.value("hop_s", p.hop_s);
    p.mel_bands = j.value("mel_bands", p.mel_bands);
    p.fmin_hz = j.value("fmin_hz", p.fmin_hz);
    p.fmax_hz = j.value("fmax_hz", p.fmax_hz);
    p.log_floor = j.value("log_floor", p.log_floor);
    p.fft_size = j.value("fft_size", p.fft_size);
  } catch (const json::exception& e) {
    throw Error(fmt::format("invalid spectrogram parameters: {}", e.what()));
  }
  p.validate();
  return p;
}

json spectrogram_params_to_json(const SpectrogramParams& p) {
  return {{"window_s", p.window_s}, {"hop_s", p.hop_s},         {"mel_bands", p.mel_bands},
          {"fmin_hz", p.fmin_hz},   {"fmax_hz", p.fmax_hz},     {"log_floor", p.log_floor},
          {"fft_size", p.fft_size}};
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(const SpectrogramParams& params, int sample_rate) {
  params.validate(sample_rate);
  const std::size_t bands = params.mel_bands;
  const std::size_t nfft = params.fft_samples(sample_rate);
  const std::size_t bins = nfft / 2 + 1;
  const double mel_lo = hz_to_mel(params.fmin_hz);
  const double mel_hi = hz_to_mel(params.fmax_hz);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(bands + 1));
  }
  MelFilterbank fb;
  fb.weights = Matrix{bands, bins, std::vector<double>(bands * bins, 0.0)};
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    fb.lower_hz.push_back(lo);
    fb.center_hz.push_back(mid);
    fb.upper_hz.push_back(hi);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      double w = 0.0;
      if (f >= lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f <= hi) {
        w = (hi - f) / (hi - mid);
      }
      fb.weights.at(b, k) = w;
    }
  }
  return fb;
}

namespace {

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void execute() { fftw_execute(plan_); }
  double magnitude(std::size_t k) const { return std::hypot(out_[k][0], out_[k][1]); }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

Matrix log_mel_spectrogram(const AudioBuffer& audio, const SpectrogramParams& params) {
  const int sr = audio.sample_rate;
  const auto fb = mel_filterbank(params, sr);
  const std::size_t win = params.window_samples(sr);
  const std::size_t hop = params.hop_samples(sr);
  const std::size_t nfft = params.fft_samples(sr);
  const std::size_t bins = nfft / 2 + 1;
  if (win == 0 || hop == 0) throw Error("window and hop must span at least one sample");
  if (audio.samples.size() < win) {
    throw Error(fmt::format("audio of {} samples is shorter than one {}-sample window",
                            audio.samples.size(), win));
  }
  const std::size_t frames = (audio.samples.size() - win) / hop + 1;

  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(win));
  }

  RealFft fft(nfft);
  Matrix out{frames, params.mel_bands, std::vector<double>(frames * params.mel_bands)};
  std::vector<double> mag(bins);
  for (std::size_t f = 0; f < frames; ++f) {
    double* in = fft.input();
    const std::size_t offset = f * hop;
    for (std::size_t i = 0; i < nfft; ++i) {
      in[i] = i < win ? window[i] * audio.samples[offset + i] : 0.0;
    }
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) mag[k] = fft.magnitude(k);
    for (std::size_t b = 0; b < params.mel_bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += fb.weights.at(b, k) * mag[k];
      out.at(f, b) = std::log(e + params.log_floor);
    }
  }
  return out;
}

std::vector<double> pooled_embedding(const Matrix& spectrogram) {
  if (spectrogram.rows == 0 || spectrogram.cols == 0) {
    throw Error("cannot pool an empty spectrogram");
  }
  std::vector<double> out(spectrogram.cols, 0.0);
  for (std::size_t r = 0; r < spectrogram.rows; ++r) {
    for (std::size_t c = 0; c < spectrogram.cols; ++c) out[c] += spectrogram.at(r, c);
  }
  for (double& v : out) v /= static_cast<double>(spectrogram.rows);
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(fmt::format("cosine of vectors of length {} and {}", a.size(), b.size()));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error("cosine of a zero vector");
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

namespace {

struct Clip {
  std::string id;
  std::vector<double> embedding;
};

std::vector<Clip> embed_manifest(const Manifest& m, const SpectrogramParams& params,
                                 std::size_t parallelism) {
  if (m.utterances.empty()) throw Error(fmt::format("manifest {} is empty", m.corpus_name));
  std::vector<Clip> clips(m.utterances.size());
  parallel_for(clips.size(), parallelism, [&](std::size_t i) {
    const auto& u = m.utterances[i];
    try {
      clips[i] = {u.id, pooled_embedding(log_mel_spectrogram(read_audio(m.resolve(u.audio_path)),
                                                             params))};
    } catch (const Error& e) {
      throw Error(fmt::format("{}/{}: {}", m.corpus_name, u.id, e.what()));
    }
  });
  std::sort(clips.begin(), clips.end(), [](const Clip& x, const Clip& y) { return x.id < y.id; });
  return clips;
}

std::optional<DisfluencyType> recorded_type(const Manifest& m, const std::string& id) {
  const auto plans = m.provenance.find("plans");
  if (plans == m.provenance.end() || !plans->is_object()) return std::nullopt;
  const auto plan = plans->find(id);
  if (plan == plans->end() || !plan->contains("type")) return std::nullopt;
  return parse_disfluency_type(plan->at("type").get<std::string>());
}

}  // namespace

std::vector<SimilarityRow> cross_dataset_similarity(const Manifest& a, const Manifest& b,
                                                    const SpectrogramParams& params,
                                                    std::size_t parallelism) {
  const auto clips_a = embed_manifest(a, params, parallelism);
  const auto clips_b = embed_manifest(b, params, parallelism);

  std::vector<std::vector<double>> rows(clips_a.size());
  parallel_for(clips_a.size(), parallelism, [&](std::size_t i) {
    rows[i].reserve(clips_b.size());
    for (const auto& cb : clips_b) rows[i].push_back(cosine(clips_a[i].embedding, cb.embedding));
  });

  std::map<DisfluencyType, std::vector<double>> by_type;
  std::vector<double> all;
  for (std::size_t i = 0; i < clips_a.size(); ++i) {
    all.insert(all.end(), rows[i].begin(), rows[i].end());
    if (auto t = recorded_type(a, clips_a[i].id)) {
      auto& v = by_type[*t];
      v.insert(v.end(), rows[i].begin(), rows[i].end());
    }
  }

  std::vector<SimilarityRow> out;
  for (DisfluencyType t : kReportTypeOrder) {
    SimilarityRow row{std::string(report_label(t)), std::nullopt};
    if (auto it = by_type.find(t); it != by_type.end()) row.summary = stats::summarize(it->second);
    out.push_back(std::move(row));
  }
  out.push_back({std::string(stats::kAllModels), stats::summarize(all)});
  return out;
}

std::string similarity_report_csv(const std::vector<SimilarityRow>& first,
                                  const std::string& first_name,
                                  const std::vector<SimilarityRow>& second,
                                  const std::string& second_name) {
  if (first.size() != second.size()) throw Error("similarity tables differ in row count");
  auto cells = [](const SimilarityRow& r) -> std::string {
    if (!r.summary) return ",";
    return fmt::format("{:.6f},{:.6f}", r.summary->mean, r.summary->sd);
  };
  std::string out = fmt::format("event,{0}_mu,{0}_sigma,{1}_mu,{1}_sigma\n", first_name, second_name);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].label != second[i].label) throw Error("similarity tables differ in row labels");
    out += fmt::format("{},{},{}\n", first[i].label, cells(first[i]), cells(second[i]));
  }
  return out;
}

}  // namespace stutterbias
