#include "nrf/partition.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace nrf {

AreaPartition AreaPartition::build(const std::vector<std::pair<int, int>>& sizes) {
  if (sizes.size() <= 1)
    throw Error(ErrorCode::invalid_argument,
                "partition needs more than one area, got " +
                    std::to_string(sizes.size()));
  AreaPartition p;
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i].first <= 0 || sizes[i].second <= 0)
      throw Error(ErrorCode::invalid_argument,
                  "area " + std::to_string(i + 1) +
                      " has a non-positive state or input count");
    p.nx_.push_back(sizes[i].first);
    p.nu_.push_back(sizes[i].second);
  }
  return p;
}

AreaPartition AreaPartition::with_controller_sizes(const std::vector<int>& nw) const {
  if (static_cast<int>(nw.size()) != areas())
    throw Error(ErrorCode::dimension_mismatch,
                "controller sizes: expected " + std::to_string(areas()) +
                    " entries, got " + std::to_string(nw.size()));
  for (int v : nw)
    if (v < 0)
      throw Error(ErrorCode::invalid_argument, "negative controller size");
  AreaPartition p = *this;
  p.nw_ = nw;
  return p;
}

const std::vector<int>& AreaPartition::sizes(Signal s) const {
  switch (s) {
    case Signal::x: return nx_;
    case Signal::u: return nu_;
    case Signal::w: break;
  }
  if (nw_.empty())
    throw Error(ErrorCode::invalid_argument,
                "controller-state sizes have not been attached to the partition");
  return nw_;
}

int AreaPartition::size(Signal s, int i) const {
  const auto& v = sizes(s);
  if (i < 0 || i >= static_cast<int>(v.size()))
    throw Error(ErrorCode::invalid_argument,
                "area index " + std::to_string(i + 1) + " out of range");
  return v[i];
}

int AreaPartition::offset(Signal s, int i) const {
  const auto& v = sizes(s);
  if (i < 0 || i >= static_cast<int>(v.size()))
    throw Error(ErrorCode::invalid_argument,
                "area index " + std::to_string(i + 1) + " out of range");
  return std::accumulate(v.begin(), v.begin() + i, 0);
}

int AreaPartition::total(Signal s) const {
  const auto& v = sizes(s);
  return std::accumulate(v.begin(), v.end(), 0);
}

std::vector<int> AreaPartition::indices(Signal s, int i) const {
  std::vector<int> out(size(s, i));
  std::iota(out.begin(), out.end(), offset(s, i));
  return out;
}

int AreaPartition::area_of(Signal s, int k) const {
  const auto& v = sizes(s);
  int acc = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (k < acc && k >= 0) return static_cast<int>(i);
  }
  throw Error(ErrorCode::invalid_argument,
              "global index " + std::to_string(k + 1) + " out of range");
}

Matrix AreaPartition::selector(Signal s, int i) const {
  Matrix S = Matrix::Zero(total(s), size(s, i));
  S.middleRows(offset(s, i), size(s, i)).setIdentity();
  return S;
}

Matrix AreaPartition::z_selector(int i) const {
  const Matrix Sx = selector(Signal::x, i), Su = selector(Signal::u, i);
  Matrix Z = Matrix::Zero(Sx.rows() + Su.rows(), Sx.cols() + Su.cols());
  Z.topLeftCorner(Sx.rows(), Sx.cols()) = Sx;
  Z.bottomRightCorner(Su.rows(), Su.cols()) = Su;
  return Z;
}

Matrix AreaPartition::zc_selector(int i) const {
  const Matrix Sx = selector(Signal::x, i), Sw = selector(Signal::w, i);
  Matrix Z = Matrix::Zero(Sx.rows() + Sw.rows(), Sx.cols() + Sw.cols());
  Z.topLeftCorner(Sx.rows(), Sx.cols()) = Sx;
  Z.bottomRightCorner(Sw.rows(), Sw.cols()) = Sw;
  return Z;
}

Vector AreaPartition::slice(const Vector& v, Signal s, int i) const {
  if (v.size() != total(s))
    throw Error(ErrorCode::dimension_mismatch,
                "slice: vector length " + std::to_string(v.size()) +
                    " vs global dimension " + std::to_string(total(s)));
  return v.segment(offset(s, i), size(s, i));
}

void validate_neighborhoods(const Neighborhoods& nb, int N) {
  if (static_cast<int>(nb.size()) != N)
    throw Error(ErrorCode::invalid_argument,
                "expected " + std::to_string(N) + " neighborhoods, got " +
                    std::to_string(nb.size()));
  for (int i = 0; i < N; ++i) {
    for (int j : nb[i])
      if (j < 0 || j >= N)
        throw Error(ErrorCode::invalid_argument,
                    "neighborhood of area " + std::to_string(i + 1) +
                        " references area " + std::to_string(j + 1) +
                        ", outside 1.." + std::to_string(N));
    if (std::find(nb[i].begin(), nb[i].end(), i) == nb[i].end())
      throw Error(ErrorCode::invalid_argument,
                  "neighborhood of area " + std::to_string(i + 1) +
                      " does not contain the area itself");
  }
}

bool in_neighborhood(const Neighborhoods& nb, int i, int j) {
  return std::find(nb[i].begin(), nb[i].end(), j) != nb[i].end();
}

Neighborhoods full_neighborhoods(int N) {
  Neighborhoods nb(N);
  for (auto& s : nb) {
    s.resize(N);
    std::iota(s.begin(), s.end(), 0);
  }
  return nb;
}

}  // namespace nrf
