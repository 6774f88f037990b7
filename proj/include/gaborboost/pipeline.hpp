#pragma once

// Glue between the stages: manifest -> features -> pairs -> model ->
// gallery index -> report. Used by the CLI and the integration tests.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gaborboost/boosting.hpp"
#include "gaborboost/dataio.hpp"
#include "gaborboost/gabor.hpp"
#include "gaborboost/pairs.hpp"
#include "gaborboost/parallel.hpp"
#include "gaborboost/recognizer.hpp"

namespace gaborboost {

struct LoadedImage {
  ManifestEntry entry;
  Image image;
};

inline std::vector<LoadedImage> load_images(const DatasetManifest& manifest) {
  std::vector<LoadedImage> out;
  out.reserve(manifest.size());
  for (const auto& e : manifest) out.push_back({e, load_pgm(e.path)});
  return out;
}

/// All images must share one geometry; returns the layout for it.
inline FeatureLayout common_layout(const std::vector<LoadedImage>& images,
                                   const GaborBankConfig& bank) {
  if (images.empty()) throw ParameterError("dataset is empty");
  const int w = images.front().image.width;
  const int h = images.front().image.height;
  for (const auto& li : images)
    if (li.image.width != w || li.image.height != h)
      throw ParameterError("image " + li.entry.path + " is " +
                           std::to_string(li.image.width) + "x" +
                           std::to_string(li.image.height) + ", expected " +
                           std::to_string(w) + "x" + std::to_string(h));
  FeatureLayout layout{bank, w, h};
  layout.validate();
  return layout;
}

/// Images used to build difference pairs: those tagged `train`, or the
/// gallery when nothing is tagged `train`.
inline std::vector<const LoadedImage*> training_images(
    const std::vector<LoadedImage>& images) {
  std::vector<const LoadedImage*> out;
  for (const auto& li : images)
    if (li.entry.split == Split::train) out.push_back(&li);
  if (out.empty())
    for (const auto& li : images)
      if (li.entry.split == Split::gallery) out.push_back(&li);
  return out;
}

struct PairRequest {
  std::size_t num_intra = 0;  // 0: every intra pair, at most 200
  std::size_t num_extra = 0;  // 0: eight per intra pair, at most all
  std::uint64_t seed = 0;
};

inline TrainingSet build_training_set(const std::vector<LoadedImage>& images,
                                      const GaborBank& bank,
                                      const PairRequest& req, int workers = 1) {
  const FeatureLayout layout = common_layout(images, bank.config());
  const auto train = training_images(images);
  if (train.empty()) throw CapacityError("no gallery/train images for pairs");

  std::vector<GallerySample> gallery(train.size());
  parallel_for(train.size(), workers, [&](std::size_t i) {
    gallery[i] = {train[i]->entry.identity, train[i]->entry.path,
                  extract_features(train[i]->image, bank).values};
  });

  std::size_t intra_avail = 0;
  std::size_t total_pairs = gallery.size() * (gallery.size() - 1) / 2;
  for (std::size_t p = 0; p < gallery.size(); ++p)
    for (std::size_t q = p + 1; q < gallery.size(); ++q)
      intra_avail += gallery[p].identity == gallery[q].identity;
  const std::size_t extra_avail = total_pairs - intra_avail;

  std::size_t num_intra = req.num_intra;
  if (num_intra == 0) num_intra = std::min<std::size_t>(intra_avail, 200);
  std::size_t num_extra = req.num_extra;
  if (num_extra == 0) num_extra = std::min(extra_avail, 8 * num_intra);
  if (num_intra == 0)
    throw CapacityError("intra-person pairs: no identity has two images");
  if (num_extra == 0)
    throw CapacityError("extra-person pairs: need at least two identities");

  TrainingSet set = build_pairs(gallery, num_intra, num_extra, req.seed);
  set.layout = layout;
  return set;
}

/// Gallery entries (split gallery) and probes (split probe, or the gallery
/// itself when `probes_from_gallery`), each reduced to the model's
/// selected features with the sparse extraction path.
struct RecognitionData {
  GalleryIndex index;
  std::vector<Probe> probes;
};

inline RecognitionData build_recognition_data(
    const std::vector<LoadedImage>& images, const GaborBank& bank,
    const std::vector<std::size_t>& selection, bool probes_from_gallery,
    int workers = 1) {
  RecognitionData data;
  data.index.selection = selection;
  std::vector<const LoadedImage*> gallery;
  std::vector<const LoadedImage*> probes;
  for (const auto& li : images) {
    if (li.entry.split == Split::gallery) gallery.push_back(&li);
    if (probes_from_gallery ? li.entry.split == Split::gallery
                            : li.entry.split == Split::probe)
      probes.push_back(&li);
  }
  if (gallery.empty()) throw CapacityError("manifest has no gallery images");
  if (probes.empty()) throw CapacityError("manifest has no probe images");

  data.index.entries.resize(gallery.size());
  parallel_for(gallery.size(), workers, [&](std::size_t i) {
    data.index.entries[i] = {gallery[i]->entry.identity,
                             extract_selected(gallery[i]->image, bank, selection)};
  });
  data.probes.resize(probes.size());
  parallel_for(probes.size(), workers, [&](std::size_t i) {
    data.probes[i] = {probes[i]->entry.path, probes[i]->entry.identity,
                      extract_selected(probes[i]->image, bank, selection)};
  });
  return data;
}

/// 20, 40, ... up to min(200, rounds); a single [rounds] row below 20.
inline std::vector<std::size_t> default_dims(std::size_t rounds) {
  std::vector<std::size_t> dims;
  for (std::size_t k = 20; k <= std::min<std::size_t>(200, rounds); k += 20)
    dims.push_back(k);
  if (dims.empty() && rounds > 0) dims.push_back(rounds);
  return dims;
}

}  // namespace gaborboost
