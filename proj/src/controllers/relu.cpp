#include "accport/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace accport {

int ReluNetwork::hidden_count() const {
    int n = 0;
    for (size_t l = 0; l + 1 < W.size(); ++l) n += static_cast<int>(W[l].rows());
    return n;
}

void ReluNetwork::validate() const {
    if (W.empty() || W.size() != b.size()) throw ControllerError("network needs matching W and b");
    if (!(a_min < a_max)) throw ControllerError("network saturation bounds invalid");
    for (size_t l = 0; l < W.size(); ++l) {
        if (W[l].rows() != b[l].size()) throw ControllerError("layer bias size mismatch");
        if (l > 0 && W[l].cols() != W[l - 1].rows()) throw ControllerError("layer size mismatch");
        if (!W[l].allFinite() || !b[l].allFinite()) throw ControllerError("non-finite weight");
    }
    if (W.back().rows() != 1) throw ControllerError("network output must be scalar");
}

Vec nn_preoutput(const ReluNetwork& net, const Vec& x) {
    if (x.size() != net.input_dim()) throw ControllerError("network input dimension mismatch");
    Vec h = x;
    for (size_t l = 0; l + 1 < net.W.size(); ++l) h = (net.W[l] * h + net.b[l]).cwiseMax(0.0);
    return net.W.back() * h + net.b.back();
}

double nn_forward(const ReluNetwork& net, const Vec& x) {
    return std::clamp(nn_preoutput(net, x)(0), net.a_min, net.a_max);
}

std::vector<char> nn_pattern(const ReluNetwork& net, const Vec& x) {
    std::vector<char> p;
    Vec h = x;
    for (size_t l = 0; l + 1 < net.W.size(); ++l) {
        const Vec z = net.W[l] * h + net.b[l];
        for (Eigen::Index j = 0; j < z.size(); ++j) p.push_back(z(j) >= 0.0 ? 1 : 0);
        h = z.cwiseMax(0.0);
    }
    return p;
}

NnRegion nn_region(const ReluNetwork& net, const std::vector<char>& pattern) {
    if (static_cast<int>(pattern.size()) != net.hidden_count())
        throw ControllerError("activation pattern size mismatch");
    const int d = net.input_dim();
    Mat P = Mat::Identity(d, d);
    Vec p = Vec::Zero(d);
    Mat A(net.hidden_count(), d);
    Vec b(net.hidden_count());
    int k = 0;
    for (size_t l = 0; l + 1 < net.W.size(); ++l) {
        Mat Q = net.W[l] * P;
        Vec q = net.W[l] * p + net.b[l];
        for (Eigen::Index j = 0; j < Q.rows(); ++j, ++k) {
            if (pattern[k]) {
                A.row(k) = -Q.row(j);
                b(k) = q(j);
            } else {
                A.row(k) = Q.row(j);
                b(k) = -q(j);
                Q.row(j).setZero();
                q(j) = 0.0;
            }
        }
        P = Q;
        p = q;
    }
    NnRegion r;
    r.poly = HPolytope(A, b);
    r.K = net.W.back() * P;
    r.g = (net.W.back() * p + net.b.back())(0);
    r.empty = r.poly.known_empty() || is_empty(r.poly);
    return r;
}

ReluNetwork fixture_network(int input_dim, const std::vector<int>& hidden, std::uint64_t seed,
                            double a_min, double a_max, double output_bias, double weight_scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    ReluNetwork net;
    net.a_min = a_min;
    net.a_max = a_max;
    int fan_in = input_dim;
    std::vector<int> sizes = hidden;
    sizes.push_back(1);
    for (int width : sizes) {
        Mat W(width, fan_in);
        Vec b(width);
        const double s = weight_scale / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = s * nd(rng);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = weight_scale * nd(rng);
        net.W.push_back(W);
        net.b.push_back(b);
        fan_in = width;
    }
    net.b.back()(0) = output_bias;
    net.validate();
    return net;
}

ReluNetwork zero_surrogate(const ReluNetwork& net) {
    ReluNetwork z = net;
    for (auto& W : z.W) W.setZero();
    for (auto& b : z.b) b.setZero();
    return z;
}

}  // namespace accport
