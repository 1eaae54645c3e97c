#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "seismonet/error.hpp"
#include "seismonet/signal.hpp"
#include "test_support.hpp"

using namespace seismonet;
using namespace seismonet::signal;
using seismonet::testing::TempDir;

namespace {

std::vector<std::size_t> brute_force_dt(const std::vector<SampleIndex>& ann, std::size_t length) {
  std::vector<std::size_t> out(length);
  for (std::size_t i = 0; i < length; ++i) {
    std::size_t best = SIZE_MAX;
    for (auto a : ann) best = std::min(best, a > i ? a - i : i - a);
    out[i] = best;
  }
  return out;
}

Record ramp_record(std::size_t length, double fs, std::vector<SampleIndex> peaks) {
  Record r;
  r.subject_id = "ramp";
  r.fs = fs;
  for (std::size_t i = 0; i < length; ++i) r.scg.push_back(static_cast<double>(i));
  r.rpeaks = std::move(peaks);
  return r;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

// --- distance transform ---------------------------------------------------------------

TEST(DistanceTransform, WorkedExamples) {
  EXPECT_EQ(distance_transform(std::vector<SampleIndex>{0}, 5), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(distance_transform(std::vector<SampleIndex>{2, 7}, 10),
            (std::vector<std::size_t>{2, 1, 0, 1, 2, 2, 1, 0, 1, 2}));
  std::vector<SampleIndex> every(9);
  for (std::size_t i = 0; i < every.size(); ++i) every[i] = i;
  EXPECT_EQ(distance_transform(every, 9), std::vector<std::size_t>(9, 0));
}

TEST(DistanceTransform, EmptyAnnotationsRejected) {
  EXPECT_THROW(distance_transform(std::vector<SampleIndex>{}, 5), ValidationError);
}

TEST(DistanceTransform, PropertiesAgainstBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t length = seismonet::testing::pick(rng, 1, 200);
    std::set<SampleIndex> s;
    const std::size_t k = seismonet::testing::pick(rng, 1, std::min<std::size_t>(length, 12));
    while (s.size() < k) s.insert(seismonet::testing::pick(rng, 0, length - 1));
    const std::vector<SampleIndex> ann(s.begin(), s.end());
    const auto dt = distance_transform(ann, length);
    ASSERT_EQ(dt, brute_force_dt(ann, length));
    for (auto a : ann) EXPECT_EQ(dt[a], 0u);
    for (std::size_t i = 0; i + 1 < length; ++i) {
      EXPECT_LE(dt[i + 1] > dt[i] ? dt[i + 1] - dt[i] : dt[i] - dt[i + 1], 1u);
    }
  }
}

// --- records --------------------------------------------------------------------------

TEST(RecordIo, ParsesThreeRowFile) {
  TempDir dir("rec");
  write_file(dir.path() / "s.csv", "t,scg,ecg\n0,0.1,0.5\n1,0.2,0.4\n2,0.1,0.3\n");
  const auto r = load_record(dir.path() / "s.csv", 5000.0);
  EXPECT_EQ(r.length(), 3u);
  EXPECT_EQ(r.subject_id, "s");
  ASSERT_TRUE(r.ecg);
  EXPECT_DOUBLE_EQ((*r.ecg)[2], 0.3);
  EXPECT_FALSE(r.rpeaks);
}

TEST(RecordIo, RepeatedAnnotationRejected) {
  TempDir dir("rec");
  write_file(dir.path() / "s.csv", "t,scg\n0,0\n1,0\n2,0\n3,0\n4,0\n5,0\n6,0\n");
  write_file(annotation_path(dir.path() / "s.csv"), "5\n5\n");
  EXPECT_THROW(load_record(dir.path() / "s.csv", 100.0), ValidationError);
}

TEST(RecordIo, OutOfRangeAnnotationRejected) {
  TempDir dir("rec");
  write_file(dir.path() / "s.csv", "t,scg\n0,0\n1,0\n");
  write_file(annotation_path(dir.path() / "s.csv"), "2\n");
  EXPECT_THROW(load_record(dir.path() / "s.csv", 100.0), ValidationError);
}

TEST(RecordIo, MalformedFilesReportFormatErrors) {
  TempDir dir("rec");
  write_file(dir.path() / "a.csv", "time,x\n0,1\n");
  EXPECT_THROW(load_record(dir.path() / "a.csv", 100.0), FormatError);
  write_file(dir.path() / "b.csv", "t,scg\n0,1\n1,abc\n");
  try {
    load_record(dir.path() / "b.csv", 100.0);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  write_file(dir.path() / "c.csv", "t,scg\n1,1\n0,1\n");
  EXPECT_THROW(load_record(dir.path() / "c.csv", 100.0), FormatError);
  EXPECT_THROW(load_record(dir.path() / "missing.csv", 100.0), ValidationError);
}

TEST(RecordIo, SynthRoundTripIsBitExact) {
  TempDir dir("rec");
  SynthParams p;
  p.duration_s = 12.0;
  p.seed = 9;
  const auto rec = synth_record(p, "subj");
  save_record(rec, dir.path() / "subj.csv");
  const auto back = load_record(dir.path() / "subj.csv", p.fs);
  EXPECT_EQ(back.scg, rec.scg);
  EXPECT_EQ(back.ecg, rec.ecg);
  EXPECT_EQ(back.rpeaks, rec.rpeaks);
}

TEST(RecordIo, AnnotationRoundTrip) {
  TempDir dir("rec");
  const std::vector<SampleIndex> peaks{3, 17, 200};
  save_annotations(peaks, dir.path() / "x.rpeaks");
  EXPECT_EQ(load_annotations(dir.path() / "x.rpeaks"), peaks);
  EXPECT_EQ(annotation_path("/a/b/rec.csv"), std::filesystem::path("/a/b/rec.rpeaks"));
}

TEST(RecordValidate, Invariants) {
  Record r = ramp_record(10, 100.0, {1, 5});
  EXPECT_NO_THROW(r.validate());
  r.ecg = std::vector<double>(9, 0.0);
  EXPECT_THROW(r.validate(), ValidationError);
  r.ecg.reset();
  r.fs = 0.0;
  EXPECT_THROW(r.validate(), ValidationError);
  r.fs = 100.0;
  r.rpeaks = std::vector<SampleIndex>{5, 1};
  EXPECT_THROW(r.validate(), ValidationError);
}

// --- windowing ------------------------------------------------------------------------

TEST(Windowing, CountExamples) {
  EXPECT_EQ(segment_windows(ramp_record(6000, 100.0, {}), 10.0, 5.0).size(), 11u);
  const auto one = segment_windows(ramp_record(1000, 100.0, {}), 10.0, 5.0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].start, 0u);
}

TEST(Windowing, CountFormulaOnRandomShapes) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t w = seismonet::testing::pick(rng, 1, 50);
    const std::size_t hop = seismonet::testing::pick(rng, 1, 50);
    const std::size_t len = w + seismonet::testing::pick(rng, 0, 300);
    const auto windows = segment_windows(ramp_record(len, 10.0, {}), w / 10.0, hop / 10.0);
    ASSERT_EQ(windows.size(), (len - w) / hop + 1) << len << " " << w << " " << hop;
  }
}

TEST(Windowing, OverlapRemovedReconstructsStream) {
  SynthParams p;
  p.duration_s = 20.0;
  const auto rec = synth_record(p);
  const auto windows = segment_windows(rec, 2.0, 1.0);
  std::vector<float> rebuilt;
  for (const auto& w : windows) {
    const std::size_t skip = rebuilt.size() - w.start;
    rebuilt.insert(rebuilt.end(), w.scg_seg.begin() + static_cast<std::ptrdiff_t>(skip), w.scg_seg.end());
  }
  ASSERT_EQ(rebuilt.size(), rec.length());
  for (std::size_t i = 0; i < rec.length(); ++i) EXPECT_EQ(rebuilt[i], static_cast<float>(rec.scg[i]));
}

TEST(Windowing, TargetsAndLocalPeaks) {
  const auto windows = segment_windows(ramp_record(40, 10.0, {3, 25}), 1.0, 1.0);
  ASSERT_EQ(windows.size(), 4u);
  EXPECT_EQ(*windows[0].rpeaks_local, std::vector<SampleIndex>{3});
  EXPECT_TRUE(windows[0].labeled());
  EXPECT_FALSE(windows[1].labeled());
  EXPECT_TRUE(windows[1].rpeaks_local->empty());
  EXPECT_EQ(*windows[2].rpeaks_local, std::vector<SampleIndex>{5});
  EXPECT_EQ((*windows[2].target_dt)[0], 5.0f);
  EXPECT_FALSE(windows[3].labeled());
}

TEST(Windowing, OptionalClipCapsTargets) {
  const auto windows = segment_windows(ramp_record(20, 10.0, {0}), WindowOptions{2.0, 1.0, 4.0f});
  for (float v : *windows[0].target_dt) EXPECT_LE(v, 4.0f);
  EXPECT_EQ((*windows[0].target_dt)[19], 4.0f);
}

TEST(Windowing, ShortRecordAndBadLengths) {
  EXPECT_THROW(segment_windows(ramp_record(5, 10.0, {}), 1.0, 1.0), EmptyResultError);
  EXPECT_THROW(segment_windows(ramp_record(50, 10.0, {}), 0.15, 1.0), ValidationError);
}

// --- splits ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::vector<Window>> numbered(std::size_t n, const std::string& subject = "s") {
  std::vector<Window> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i].subject_id = subject;
    v[i].start = i * 10;
  }
  return {{subject, v}};
}

}  // namespace

TEST(Split, RatioExamples) {
  const SplitOptions keep{false};
  auto s = split_dataset(numbered(10), SplitRatios{}, keep);
  EXPECT_EQ(s.train.size(), 6u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);
  s = split_dataset(numbered(5), SplitRatios{}, keep);
  EXPECT_EQ(s.train.size(), 3u);
  EXPECT_EQ(s.val.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_THROW(split_dataset(numbered(10), SplitRatios{0.5, 0.5, 0.1}), ValidationError);
  EXPECT_THROW(split_dataset(numbered(2), SplitRatios{}), InsufficientDataError);
}

TEST(Split, DropBoundaryRemovesFirstOfValAndTest) {
  const auto s = split_dataset(numbered(10), SplitRatios{}, SplitOptions{true});
  ASSERT_EQ(s.val.size(), 1u);
  ASSERT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.val[0].start, 70u);
  EXPECT_EQ(s.test[0].start, 90u);
}

TEST(Split, ContiguousDisjointAndComplete) {
  std::mt19937_64 rng(7);
  auto windows = numbered(37, "a");
  windows.merge(numbered(23, "b"));
  std::shuffle(windows["a"].begin(), windows["a"].end(), rng);
  const auto s = split_dataset(windows, SplitRatios{}, SplitOptions{false});
  std::set<std::pair<std::string, std::size_t>> seen;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (const auto& w : *part) EXPECT_TRUE(seen.insert({w.subject_id, w.start}).second);
  }
  EXPECT_EQ(seen.size(), 60u);
  std::size_t max_train_a = 0, min_val_a = SIZE_MAX, max_val_a = 0, min_test_a = SIZE_MAX;
  for (const auto& w : s.train) if (w.subject_id == "a") max_train_a = std::max(max_train_a, w.start);
  for (const auto& w : s.val) if (w.subject_id == "a") {
    min_val_a = std::min(min_val_a, w.start);
    max_val_a = std::max(max_val_a, w.start);
  }
  for (const auto& w : s.test) if (w.subject_id == "a") min_test_a = std::min(min_test_a, w.start);
  EXPECT_LT(max_train_a, min_val_a);
  EXPECT_LT(max_val_a, min_test_a);
}

// --- resampling -----------------------------------------------------------------------

TEST(Resample, Examples) {
  const std::vector<double> x{0, 1, 2, 3};
  EXPECT_EQ(resample(x, 4.0, 4.0), x);
  EXPECT_EQ(resample(x, 4.0, 2.0), (std::vector<double>{0, 2}));
}

// Linear interpolation reproduces a ramp exactly; only the clamped tail of
// the upsampled signal deviates, by less than one step of the coarse input.
TEST(Resample, RampDownUpWithinOneStep) {
  std::vector<double> ramp(1000);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.01 * static_cast<double>(i);
  const auto down = resample(ramp, 500.0, 125.0);
  const auto up = resample(down, 125.0, 500.0);
  ASSERT_EQ(up.size(), ramp.size());
  const double coarse_step = down[1] - down[0];
  for (std::size_t i = 0; i < ramp.size(); ++i) EXPECT_LE(std::abs(up[i] - ramp[i]), coarse_step + 1e-12) << i;
}

TEST(Resample, AnnotationsRescaleAndDedup) {
  const std::vector<SampleIndex> peaks{0, 10, 11, 999};
  EXPECT_EQ(rescale_annotations(peaks, 1000.0, 100.0, 100), (std::vector<SampleIndex>{0, 1, 99}));
}

TEST(Resample, RecordKeepsPeaksInRange) {
  SynthParams p;
  p.fs = 500.0;
  p.duration_s = 10.0;
  const auto rec = synth_record(p);
  const auto out = resample_record(rec, 100.0);
  EXPECT_EQ(out.length(), 1000u);
  EXPECT_EQ(out.fs, 100.0);
  EXPECT_NO_THROW(out.validate());
  EXPECT_EQ(out.rpeaks->size(), rec.rpeaks->size());
}

// --- synthesis and annotation ---------------------------------------------------------

TEST(Synth, DeterministicUnderSeed) {
  SynthParams p;
  p.seed = 42;
  const auto a = synth_record(p), b = synth_record(p);
  EXPECT_EQ(a.scg, b.scg);
  EXPECT_EQ(a.rpeaks, b.rpeaks);
  p.seed = 43;
  EXPECT_NE(synth_record(p).scg, a.scg);
}

TEST(Synth, BeatCountAndRegularity) {
  SynthParams p;
  p.scg_noise_sigma = 0.0;
  p.mean_hr_bpm = 60.0;
  p.duration_s = 10.0;
  const auto n = synth_record(p).rpeaks->size();
  EXPECT_GE(n, 9u);
  EXPECT_LE(n, 11u);

  p.hr_jitter = 0.0;
  p.fs = 200.0;
  const auto peaks = *synth_record(p).rpeaks;
  for (std::size_t i = 2; i < peaks.size(); ++i) EXPECT_EQ(peaks[i] - peaks[i - 1], peaks[1] - peaks[0]);
}

TEST(Synth, RejectsInvalidParameters) {
  SynthParams p;
  p.mean_hr_bpm = 300.0;
  EXPECT_THROW(synth_record(p), ValidationError);
  p = SynthParams{};
  p.duration_s = 0.0;
  EXPECT_THROW(synth_record(p), ValidationError);
}

TEST(Annotate, RecoversNoiseFreePeaks) {
  SynthParams p;
  p.fs = 250.0;
  p.duration_s = 10.0;
  p.mean_hr_bpm = 60.0;
  const auto rec = synth_record(p);
  const auto found = annotate_ecg_rpeaks(*rec.ecg, p.fs);
  ASSERT_EQ(found.size(), rec.rpeaks->size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    const double err_ms = std::abs(static_cast<double>(found[i]) - static_cast<double>((*rec.rpeaks)[i])) * 1000.0 / p.fs;
    EXPECT_LE(err_ms, 10.0);
  }
}

TEST(Annotate, ZeroSignalHasNoPeaks) {
  EXPECT_TRUE(annotate_ecg_rpeaks(std::vector<double>(1000, 0.0), 250.0).empty());
}

TEST(Annotate, NoisyEcgMostPeaksWithin20ms) {
  std::size_t hit = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthParams p;
    p.fs = 250.0;
    p.duration_s = 30.0;
    p.seed = seed;
    auto rec = synth_record(p);
    std::mt19937_64 rng(seed + 100);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (auto& v : *rec.ecg) v += noise(rng);
    const auto found = annotate_ecg_rpeaks(*rec.ecg, p.fs);
    for (auto truth : *rec.rpeaks) {
      ++total;
      const bool ok = std::any_of(found.begin(), found.end(), [&](SampleIndex f) {
        return std::abs(static_cast<double>(f) - static_cast<double>(truth)) * 1000.0 / p.fs <= 20.0;
      });
      hit += ok;
    }
  }
  EXPECT_GE(static_cast<double>(hit), 0.95 * static_cast<double>(total));
}
