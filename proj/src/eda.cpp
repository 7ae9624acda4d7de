#include "dilab/eda.hpp"

#include <string>

namespace dilab {
namespace {

NetParams make_net(int n_in, int n_out, const Architecture& arch)
{
    std::vector<int> dims{n_in};
    dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
    dims.push_back(n_out);
    return NetParams::random(std::move(dims), arch.activation, arch.seed, arch.gain, arch.k_max);
}

} // namespace

EdaModel::EdaModel(Encoder encoder, NetParams net, Decoder decoder)
    : encoder_(std::move(encoder)), net_(std::move(net)), decoder_(std::move(decoder))
{
    net_.validate();
    if (net_.input_dim() != encoder_.rank()) {
        throw DimensionError("EdaModel: network input " + std::to_string(net_.input_dim()) +
                             " != encoder rank " + std::to_string(encoder_.rank()));
    }
    if (net_.output_dim() != decoder_.rank()) {
        throw DimensionError("EdaModel: network output " + std::to_string(net_.output_dim()) +
                             " != decoder rank " + std::to_string(decoder_.rank()));
    }
}

EdaModel EdaModel::with_net(NetParams net) const { return EdaModel(encoder_, std::move(net), decoder_); }

Coeffs eda_eval(const EdaModel& model, const Coeffs& x)
{
    return decode(model.decoder(), forward(model.net(), encode(model.encoder(), x)));
}

Coeffs eda_derivative(const EdaModel& model, const Coeffs& x, std::span<const Coeffs> dirs)
{
    if (static_cast<int>(dirs.size()) > model.max_order()) {
        throw OrderError("eda_derivative: order " + std::to_string(dirs.size()) + " exceeds k_max " +
                         std::to_string(model.max_order()));
    }
    std::vector<Vector> encoded;
    encoded.reserve(dirs.size());
    for (const auto& h : dirs) {
        encoded.push_back(encode(model.encoder(), h));
    }
    return decode(model.decoder(), directional_derivative(model.net(), encode(model.encoder(), x), encoded));
}

Matrix eda_jacobian(const EdaModel& model, const Coeffs& x)
{
    const int dim = model.input_dim();
    Matrix jac(model.output_dim(), dim);
    for (int j = 0; j < dim; ++j) {
        const Coeffs e = Coeffs::Unit(dim, j);
        jac.col(j) = eda_derivative(model, x, std::span(&e, 1));
    }
    return jac;
}

EdaModel hgno_new(int ambient_dim, int n_in, int n_out, const Architecture& arch)
{
    return EdaModel(Encoder::projection(n_in, ambient_dim), make_net(n_in, n_out, arch),
                    Decoder::projection(n_out, ambient_dim));
}

EdaModel son_new(Matrix functionals, Matrix elements, const Architecture& arch)
{
    Encoder encoder(std::move(functionals), EncoderTag::frame);
    Decoder decoder(std::move(elements));
    NetParams net = make_net(encoder.rank(), decoder.rank(), arch);
    return EdaModel(std::move(encoder), std::move(net), std::move(decoder));
}

EdaModel deeponet_new(std::span<const double> input_sensors, std::span<const double> output_sensors,
                      double epsilon, int ambient_dim, const Architecture& arch)
{
    DeepOnetPair in = deeponet_encoder(input_sensors, epsilon, ambient_dim);
    DeepOnetPair out = deeponet_encoder(output_sensors, epsilon, ambient_dim);
    NetParams net = make_net(in.encoder.rank(), out.decoder.rank(), arch);
    return EdaModel(std::move(in.encoder), std::move(net), std::move(out.decoder));
}

EdaModel pcanet_new(std::span<const Coeffs> input_samples, int n_in, std::span<const Coeffs> output_samples,
                    int n_out, const Architecture& arch)
{
    PcaPair in = pca_encoder(input_samples, n_in);
    PcaPair out = pca_encoder(output_samples, n_out);
    NetParams net = make_net(n_in, n_out, arch);
    return EdaModel(std::move(in.encoder), std::move(net), std::move(out.decoder));
}

EdaModel projection_model(int ambient_dim, int n)
{
    return EdaModel(Encoder::projection(n, ambient_dim), NetParams::affine(Matrix::Identity(n, n), Vector::Zero(n)),
                    Decoder::projection(n, ambient_dim));
}

} // namespace dilab
