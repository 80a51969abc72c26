#include "emoperf/stats/quadrants.hpp"

#include "emoperf/error.hpp"

#include <algorithm>
#include <cmath>

namespace emoperf::stats {

std::string_view to_string(Quadrant q) {
    switch (q) {
        case Quadrant::happy: return "happy";
        case Quadrant::relaxed: return "relaxed";
        case Quadrant::sad: return "sad";
        case Quadrant::angry: return "angry";
    }
    return "?";
}

Quadrant quadrantize(double arousal_z, double valence_z) {
    if (arousal_z >= 0.0) return valence_z >= 0.0 ? Quadrant::happy : Quadrant::angry;
    return valence_z >= 0.0 ? Quadrant::relaxed : Quadrant::sad;
}

namespace {

struct Problem {
    const Eigen::MatrixXd& A;  // n x (p + 1), intercept column first
    const Eigen::MatrixXi& Y;  // n x K one-hot
    const Eigen::VectorXd& weight;  // per row
    double ridge;

    // Penalized negative log-likelihood; fills class probabilities.
    double objective(const Eigen::MatrixXd& W, Eigen::MatrixXd* prob) const {
        Eigen::MatrixXd S = A * W;
        double nll = 0.0;
        for (Eigen::Index i = 0; i < S.rows(); ++i) {
            const double m = S.row(i).maxCoeff();
            const double lse = m + std::log((S.row(i).array() - m).exp().sum());
            for (Eigen::Index k = 0; k < S.cols(); ++k) {
                if (Y(i, k)) nll -= weight(i) * (S(i, k) - lse);
                S(i, k) = std::exp(S(i, k) - lse);
            }
        }
        if (prob) *prob = std::move(S);
        return nll + 0.5 * ridge * W.squaredNorm();
    }
};

Eigen::VectorXd flatten(const Eigen::MatrixXd& W) { return Eigen::Map<const Eigen::VectorXd>(W.data(), W.size()); }

}  // namespace

SoftmaxClassifier SoftmaxClassifier::fit(const Eigen::MatrixXd& X, std::span<const int> labels, double ridge,
                                         const SoftmaxClassifier* warm_start) {
    if (static_cast<std::size_t>(X.rows()) != labels.size()) throw InputError("classifier: X and labels differ in length");
    SoftmaxClassifier model;
    model.classes_.assign(labels.begin(), labels.end());
    std::sort(model.classes_.begin(), model.classes_.end());
    model.classes_.erase(std::unique(model.classes_.begin(), model.classes_.end()), model.classes_.end());
    if (model.classes_.size() < 2) throw InputError("classifier needs at least two classes");
    if (!(ridge > 0.0)) throw InputError("classifier ridge must be positive");

    model.scaler_ = Standardizer::fit(X);
    const Eigen::Index n = X.rows();
    const Eigen::Index q = X.cols() + 1;
    const auto K = static_cast<Eigen::Index>(model.classes_.size());
    Eigen::MatrixXd A(n, q);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = model.scaler_.apply(X);
    Eigen::MatrixXi Y = Eigen::MatrixXi::Zero(n, K);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto it = std::lower_bound(model.classes_.begin(), model.classes_.end(), labels[static_cast<std::size_t>(i)]);
        Y(i, it - model.classes_.begin()) = 1;
    }
    // Class-balanced row weights n / (K n_k): the fitted intercepts then encode a uniform prior, so
    // removing one clip in a leave-one-out fold does not bias the prediction against its class.
    const Eigen::VectorXi counts = Y.colwise().sum().transpose();
    Eigen::VectorXd weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index k = 0;
        Y.row(i).maxCoeff(&k);
        weight(i) = static_cast<double>(n) / (static_cast<double>(K) * counts(k));
    }
    const Problem problem{A, Y, weight, ridge};

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(q, K);
    if (warm_start && warm_start->classes_ == model.classes_ && warm_start->weights_.rows() == q) W = warm_start->weights_;

    Eigen::MatrixXd P;
    double f = problem.objective(W, &P);
    const Eigen::Index d = q * K;
    for (int iter = 0;; ++iter) {
        const Eigen::MatrixXd G = A.transpose() * (weight.asDiagonal() * (P - Y.cast<double>())) + ridge * W;
        model.gradient_norm_ = G.norm();
        model.iterations_ = iter;
        if (model.gradient_norm_ < kSoftmaxGradientTolerance) break;
        if (iter >= kSoftmaxMaxIterations) {
            throw NumericalError("softmax classifier did not converge in " + std::to_string(kSoftmaxMaxIterations) +
                                 " iterations (gradient norm " + std::to_string(model.gradient_norm_) + ")");
        }
        // Hessian blocks (k, l) = A' diag(p_k (delta_kl - p_l)) A, variables stored column-major by class.
        Eigen::MatrixXd H = ridge * Eigen::MatrixXd::Identity(d, d);
        for (Eigen::Index k = 0; k < K; ++k) {
            for (Eigen::Index l = k; l < K; ++l) {
                Eigen::VectorXd w = -P.col(k).cwiseProduct(P.col(l));
                if (k == l) w += P.col(k);
                w = w.cwiseProduct(weight);
                const Eigen::MatrixXd block = A.transpose() * w.asDiagonal() * A;
                H.block(k * q, l * q, q, q) += block;
                if (l != k) H.block(l * q, k * q, q, q) += block;
            }
        }
        const Eigen::VectorXd g = flatten(G);
        const Eigen::VectorXd step = -H.ldlt().solve(g);
        const Eigen::MatrixXd dW = Eigen::Map<const Eigen::MatrixXd>(step.data(), q, K);
        const double slope = g.dot(step);
        double t = 1.0;
        Eigen::MatrixXd P_new;
        double f_new = 0.0;
        for (int halvings = 0;; ++halvings) {
            f_new = problem.objective(W + t * dW, &P_new);
            if (f_new <= f + 1e-4 * t * slope || halvings >= 50) break;
            // Near the optimum the decrease drops below rounding; accept the Newton step.
            if (t == 1.0 && f_new <= f + 1e-13 * std::max(1.0, std::abs(f))) break;
            t *= 0.5;
        }
        W += t * dW;
        P = std::move(P_new);
        f = f_new;
    }
    model.weights_ = std::move(W);
    return model;
}

int SoftmaxClassifier::predict(const Eigen::RowVectorXd& x) const {
    const Eigen::RowVectorXd z = (x - scaler_.mean).cwiseQuotient(scaler_.scale);
    const Eigen::RowVectorXd s = weights_.row(0) + z * weights_.bottomRows(weights_.rows() - 1);
    Eigen::Index best = 0;
    s.maxCoeff(&best);
    return classes_[static_cast<std::size_t>(best)];
}

ClassificationReport loo_accuracy(const Eigen::MatrixXd& X, std::span<const int> labels) {
    ClassificationReport report;
    report.n = labels.size();
    for (int l : labels) {
        if (l >= 0 && l < 4) ++report.class_counts[static_cast<std::size_t>(l)];
    }
    const SoftmaxClassifier full = SoftmaxClassifier::fit(X, labels);
    const Eigen::Index n = X.rows();
    std::size_t correct = 0;
    std::vector<int> train_labels(static_cast<std::size_t>(n - 1));
    Eigen::MatrixXd train(n - 1, X.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index r = 0, j = 0; r < n; ++r) {
            if (r == i) continue;
            train.row(j) = X.row(r);
            train_labels[static_cast<std::size_t>(j)] = labels[static_cast<std::size_t>(r)];
            ++j;
        }
        const SoftmaxClassifier model = SoftmaxClassifier::fit(train, train_labels, kSoftmaxRidge, &full);
        if (model.predict(X.row(i)) == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    report.loo_accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    return report;
}

ClassificationReport classify_quadrants(const Dataset& dataset, FeatureSet set) {
    const Design design = make_design(dataset, set, Target::arousal);
    std::vector<int> labels;
    for (const auto& id : design.clip_ids) {
        const EmotionTarget* t = dataset.target(id);
        labels.push_back(static_cast<int>(quadrantize(t->arousal_z, t->valence_z)));
    }
    return loo_accuracy(design.X, labels);
}

}  // namespace emoperf::stats
