#pragma once
// Plain single-network binary classifier over a whole image: one
// SubNetwork with a linear head whose output is read through a logistic.

#include <string>

#include "ius/image.hpp"
#include "ius/neural/epu.hpp"

namespace ius::neural {

template <typename T>
Matrix<T> image_to_input(const Image& image) {
  Matrix<T> m(image.channels(), static_cast<Eigen::Index>(image.height()) * image.width());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < image.channels(); ++c)
        m(c, static_cast<Eigen::Index>(y) * image.width() + x) = static_cast<T>(image.at(y, x, c));
  return m;
}

template <typename T>
class ImageClassifier {
 public:
  using Scalar = T;

  ImageClassifier() = default;
  explicit ImageClassifier(Architecture arch) {
    arch.head = Head::Linear;
    net = SubNetwork<T>(arch);
  }

  template <typename Rng>
  void initialize(Rng& rng) {
    net.initialize(rng);
  }

  template <typename F>
  void for_each_tensor(F&& visit) { net.for_each_tensor(visit); }
  template <typename F>
  void for_each_tensor(F&& visit) const { net.for_each_tensor(visit); }

  ImageClassifier zeros_like() const { return ImageClassifier(net.architecture()); }

  double probability(const Matrix<T>& input) const {
    return logistic(static_cast<double>(net.forward(input)));
  }

  double accumulate_gradient(const Matrix<T>& input, int y, ImageClassifier& grads,
                             double& p) const {
    check_label(y);
    SubnetTrace<T> trace;
    p = logistic(static_cast<double>(net.forward(input, trace)));
    net.backward(trace, static_cast<T>(p - y), grads.net);
    return binary_cross_entropy(y, p);
  }

  friend bool operator==(const ImageClassifier&, const ImageClassifier&) = default;

  SubNetwork<T> net;
};

}  // namespace ius::neural
