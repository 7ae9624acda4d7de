#pragma once

// Encoder-decoder architectures F = D o f_theta o E and their derivatives, which are always
// evaluated in encoded coordinates:
//   D^i F(x)(h^1..h^i) = D[ D^i f_theta(Ex)(Eh^1, ..., Eh^i) ].

#include "dilab/jets.hpp"
#include "dilab/space.hpp"

namespace dilab {

class EdaModel {
public:
    EdaModel(Encoder encoder, NetParams net, Decoder decoder);

    const Encoder& encoder() const noexcept { return encoder_; }
    const NetParams& net() const noexcept { return net_; }
    const Decoder& decoder() const noexcept { return decoder_; }

    int input_dim() const noexcept { return encoder_.ambient_dim(); }
    int output_dim() const noexcept { return decoder_.ambient_dim(); }
    int max_order() const noexcept { return net_.k_max; }

    /// Same encoder/decoder, new network parameters.
    EdaModel with_net(NetParams net) const;

private:
    Encoder encoder_;
    NetParams net_;
    Decoder decoder_;
};

Coeffs eda_eval(const EdaModel& model, const Coeffs& x);

/// Throws OrderError when dirs.size() exceeds the network's k_max.
Coeffs eda_derivative(const EdaModel& model, const Coeffs& x, std::span<const Coeffs> dirs);

/// Matrix of h -> DF(x)h assembled column by column on the basis directions.
Matrix eda_jacobian(const EdaModel& model, const Coeffs& x);

struct Architecture {
    std::vector<int> hidden;
    Activation activation = Activation::tanh;
    std::uint64_t seed = 0;
    double gain = 1.0;
    int k_max = kDefaultMaxOrder;
};

/// Projection encoder onto the first n_in coefficients, projection decoder onto the first n_out.
EdaModel hgno_new(int ambient_dim, int n_in, int n_out, const Architecture& arch);

/// Arbitrary functionals (frame encoder) and decoder elements.
EdaModel son_new(Matrix functionals, Matrix elements, const Architecture& arch);

/// Sensor-evaluation encoder and partition-of-unity decoders on [0,1].
EdaModel deeponet_new(std::span<const double> input_sensors, std::span<const double> output_sensors,
                      double epsilon, int ambient_dim, const Architecture& arch);

/// PCA modes of input samples for the encoder, of output samples for the decoder.
EdaModel pcanet_new(std::span<const Coeffs> input_samples, int n_in, std::span<const Coeffs> output_samples,
                    int n_out, const Architecture& arch);

/// HGNO whose network is the identity map on R^n, i.e. the model is the truncation P_n.
EdaModel projection_model(int ambient_dim, int n);

} // namespace dilab
