#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ric::ad {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rank 0..2 extents as a POD value, cheap to copy and compare.
struct Shape {
  std::int8_t rank = 0;
  int d0 = 0;
  int d1 = 0;

  Shape() = default;
  Shape(std::initializer_list<int> dims) {
    rank = static_cast<std::int8_t>(dims.size());
    auto it = dims.begin();
    if (rank > 0) d0 = *it++;
    if (rank > 1) d1 = *it;
    if (rank > 2) throw std::invalid_argument("Shape: rank above 2 unsupported");
  }
  static Shape scalar() { return {}; }
  static Shape vector(int n) { return {n}; }
  static Shape matrix(int r, int c) { return {r, c}; }

  bool operator==(const Shape& o) const = default;

  Eigen::Index count() const {
    if (rank == 0) return 1;
    if (rank == 1) return d0;
    return static_cast<Eigen::Index>(d0) * d1;
  }

  std::vector<int> to_vector() const {
    if (rank == 0) return {};
    if (rank == 1) return {d0};
    return {d0, d1};
  }
  static Shape from_vector(const std::vector<int>& v) {
    Shape s;
    s.rank = static_cast<std::int8_t>(v.size());
    if (s.rank > 0) s.d0 = v[0];
    if (s.rank > 1) s.d1 = v[1];
    if (s.rank > 2) throw std::invalid_argument("Shape: rank above 2 unsupported");
    return s;
  }

  std::string str() const {
    if (rank == 0) return "[]";
    if (rank == 1) return "[" + std::to_string(d0) + "]";
    return "[" + std::to_string(d0) + "," + std::to_string(d1) + "]";
  }
};

// Dense double tensor, row-major data in a flat Eigen array.
struct Tensor {
  Shape shape;
  Eigen::ArrayXd data;

  Tensor() = default;

  static Tensor scalar(double v) {
    Tensor t;
    t.data = Eigen::ArrayXd::Constant(1, v);
    return t;
  }
  static Tensor vector(Eigen::ArrayXd v) {
    Tensor t;
    t.shape = Shape::vector(static_cast<int>(v.size()));
    t.data = std::move(v);
    return t;
  }
  static Tensor vector(const std::vector<double>& v) {
    return vector(Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  static Tensor vector(std::initializer_list<double> v) {
    return vector(Eigen::Map<const Eigen::ArrayXd>(v.begin(), static_cast<Eigen::Index>(v.size())));
  }
  static Tensor matrix(int rows, int cols, Eigen::ArrayXd rowmajor) {
    Tensor t;
    t.shape = Shape::matrix(rows, cols);
    t.data = std::move(rowmajor);
    return t;
  }
  static Tensor zeros(Shape shape) {
    Tensor t;
    t.shape = shape;
    t.data = Eigen::ArrayXd::Zero(shape.count());
    return t;
  }
  static Tensor constant(Shape shape, double v) {
    Tensor t;
    t.shape = shape;
    t.data = Eigen::ArrayXd::Constant(shape.count(), v);
    return t;
  }

  int rank() const { return shape.rank; }
  Eigen::Index size() const { return data.size(); }
  bool is_scalar() const { return shape.rank == 0; }
  int rows() const { return shape.rank == 0 ? 1 : shape.d0; }
  int cols() const { return shape.rank == 2 ? shape.d1 : 1; }

  double value() const { return data[0]; }  // rank-0 convenience

  Eigen::Map<const RowMajorMatrix> mat() const {
    return {data.data(), rows(), cols()};
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const { return data.allFinite(); }

  std::string shape_string() const { return shape.str(); }
};

}  // namespace ric::ad
