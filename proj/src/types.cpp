#include "mtsb/types.hpp"

namespace mtsb {

MatrixSeries::MatrixSeries(std::vector<Matrix> frames,
                           std::vector<std::string> row_labels,
                           std::vector<std::string> col_labels)
    : frames_(std::move(frames)),
      row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)) {
    if (frames_.size() < 2)
        throw InsufficientDataError("series needs at least 2 observations, got " +
                                    std::to_string(frames_.size()));
    const Index p = frames_.front().rows();
    const Index q = frames_.front().cols();
    if (p < 1 || q < 1) throw DimensionError("series frames must be at least 1x1");
    for (size_t t = 0; t < frames_.size(); ++t) {
        if (frames_[t].rows() != p || frames_[t].cols() != q)
            throw DimensionError("frame " + std::to_string(t) + " has shape " +
                                 std::to_string(frames_[t].rows()) + "x" +
                                 std::to_string(frames_[t].cols()) + ", expected " +
                                 std::to_string(p) + "x" + std::to_string(q));
        if (!frames_[t].allFinite())
            throw IngestError("frame " + std::to_string(t) + " contains non-finite values");
    }
    if (!row_labels_.empty() && static_cast<Index>(row_labels_.size()) != p)
        throw DimensionError("row_labels length does not match p");
    if (!col_labels_.empty() && static_cast<Index>(col_labels_.size()) != q)
        throw DimensionError("col_labels length does not match q");
}

MatrixSeries MatrixSeries::head(Index t) const {
    if (t < 2 || t > length())
        throw DimensionError("head length " + std::to_string(t) + " outside 2.." +
                             std::to_string(length()));
    std::vector<Matrix> sub(frames_.begin(), frames_.begin() + t);
    return MatrixSeries(std::move(sub), row_labels_, col_labels_);
}

Matrix MatrixSeries::flattened() const {
    const Index T = length(), p = rows(), q = cols();
    Matrix flat(T, p * q);
    for (Index t = 0; t < T; ++t)
        flat.row(t) = Eigen::Map<const Vector>(frames_[static_cast<size_t>(t)].data(), p * q);
    return flat;
}

Matrix MatrixSeries::flattened_transposed() const {
    const Index T = length(), p = rows(), q = cols();
    Matrix flat(T, q * p);
    for (Index t = 0; t < T; ++t) {
        Matrix xt = frames_[static_cast<size_t>(t)].transpose();
        flat.row(t) = Eigen::Map<const Vector>(xt.data(), q * p);
    }
    return flat;
}

LoadingMatrix::LoadingMatrix(LoadingKind kind, Matrix values)
    : kind_(kind), values_(std::move(values)) {
    const Index d = values_.rows(), k = values_.cols();
    if (d < 1) throw DimensionError("loading matrix needs at least one row");
    if (k > d)
        throw DimensionError("loading matrix has more columns (" + std::to_string(k) +
                             ") than rows (" + std::to_string(d) + ")");
    if (k > 0) {
        const double dev = (values_.transpose() * values_ - Matrix::Identity(k, k))
                               .cwiseAbs()
                               .maxCoeff();
        if (dev >= 1e-8)
            throw OrthonormalityError("loading columns not orthonormal (max deviation " +
                                      std::to_string(dev) + ")");
    }
}

}  // namespace mtsb
