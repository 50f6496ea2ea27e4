#include <unordered_map>

#include "prefdens/error.hpp"
#include "prefdens/optim.hpp"

namespace prefdens {

DatasetSource::DatasetSource(std::vector<PreferenceTriplet> triplets, std::size_t batch_size, std::uint64_t seed,
                             ItemSampler reg_sampler)
    : triplets_(std::move(triplets)),
      batch_size_(batch_size),
      rng_(derive_seed(seed, "minibatch")),
      reg_sampler_(std::move(reg_sampler)) {
  if (triplets_.empty()) throw ConfigError("training needs a nonempty dataset");
  if (batch_size_ == 0 || batch_size_ > triplets_.size()) batch_size_ = triplets_.size();
}

void DatasetSource::new_epoch() {
  shuffle(triplets_, rng_);
  cursor_ = 0;
  if (reg_sampler_) {
    reg_items_ = reg_sampler_(rng_);
    if (reg_items_.empty()) throw ConfigError("regularization sampler returned no items");
  }
}

const TrainingBatch& DatasetSource::batch(std::size_t) {
  if (!started_ || cursor_ + batch_size_ > triplets_.size()) {
    new_epoch();
    started_ = true;
  }
  std::span<const PreferenceTriplet> slice(triplets_.data() + cursor_, batch_size_);
  cursor_ += batch_size_;
  current_ = batch_from_triplets(slice);
  if (!reg_items_.empty()) {
    std::unordered_map<std::size_t, std::size_t> index;
    for (std::size_t i = 0; i < current_.points.size(); ++i) index.emplace(current_.points[i].id, i);
    const double w = 1.0 / static_cast<double>(reg_items_.size());
    for (const Item& it : reg_items_) {
      auto [pos, inserted] = index.try_emplace(it.id, current_.points.size());
      if (inserted) current_.points.push_back(it);
      current_.reg.push_back({pos->second, w});
    }
  }
  return current_;
}

}  // namespace prefdens
