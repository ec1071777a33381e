#include "fwt/fw_transform.hpp"

#include <cmath>
#include <limits>

#include "fwt/matrix_functions.hpp"

namespace fwt {

namespace {

double comm_rel(const Matrix& a, const Matrix& b) {
    const double scale = a.norm() * b.norm();
    if (scale == 0.0) return 0.0;
    return (a * b - b * a).norm() / scale;
}

Matrix hermitized(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

// ||U* U - 1|| with the adjoint appropriate to the Hamiltonian's symmetry:
// plain for a hermitian H, beta-weighted for a pseudo-hermitian one.
double unitarity_defect_for(const HamiltonianTriple& h, const Matrix& u) {
    const Matrix beta = h.beta();
    const BlockOperator full{h.full(), h.M.spinor_rank, h.M.basis_tag};
    const int dim = full.dim();
    Matrix defect;
    if (is_hermitian(full))
        defect = u.adjoint() * u - Matrix::Identity(dim, dim);
    else
        defect = beta * u.adjoint() * beta * u - Matrix::Identity(dim, dim);
    return defect.norm();
}

void require_invertible(const Eigen::PartialPivLU<Matrix>& lu, const char* what) {
    if (!(lu.rcond() > 1e-14))
        throw SingularSqrt(std::string(what) + " is numerically singular");
}

}  // namespace

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error("log_log_slope: need at least two matching samples");
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw Error("log_log_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

FWResult exact_fw(const HamiltonianTriple& h, const TransformOptions& opts) {
    if (!opts.stationary)
        throw Unsupported("time-dependent transforms are not implemented");
    require_same_basis(h.M, h.E);
    require_same_basis(h.M, h.O);
    const Matrix &m = h.M.matrix, &e = h.E.matrix, &o = h.O.matrix;
    const Matrix beta = h.beta();

    // All three pairwise commutators must vanish. [E, O] and [M, O] make U
    // well defined; [E, M] is equally necessary, since otherwise conjugation
    // by U moves E off its closed form.
    const double c_eo = comm_rel(e, o), c_mo = comm_rel(m, o), c_em = comm_rel(e, m);
    if (c_eo > opts.commute_tol || c_mo > opts.commute_tol || c_em > opts.commute_tol)
        throw NotExactCase(
            "commuting-case transform requires [E,O] = [M,O] = [E,M] = 0; relative "
            "norms: [E,O] " + std::to_string(c_eo) + ", [M,O] " + std::to_string(c_mo) +
            ", [E,M] " + std::to_string(c_em));

    FWResult r;
    r.epsilon = operator_sqrt(hermitized(m * m + o * o), opts.sqrt_tol);
    const Matrix s = r.epsilon + m;
    const Matrix denom = operator_sqrt(hermitized(2.0 * r.epsilon * s), opts.sqrt_tol);
    Eigen::PartialPivLU<Matrix> lu(denom);
    require_invertible(lu, "sqrt(2 eps (eps + M))");
    r.U = lu.solve(s + beta * o);
    r.U_inv = lu.solve(s - beta * o);

    r.H_fw = beta * r.epsilon + e;
    r.H_prime = r.H_fw;
    r.E_prime = e;
    r.O_prime = Matrix::Zero(m.rows(), m.cols());
    r.residual_odd_norm = 0.0;
    r.unitarity_defect = unitarity_defect_for(h, r.U);

    // Self-check: the closed form must agree with direct conjugation. A
    // mismatch here means the commutator screens let a bad case through.
    const Matrix conjugated = r.U * h.full() * r.U_inv;
    if (rel_norm(conjugated - r.H_fw, r.H_fw) > 1e-8)
        throw Error("commuting-case transform self-check failed: closed form and "
                    "direct conjugation disagree");
    return r;
}

StepResult general_fw_step(const HamiltonianTriple& h, const TransformOptions& opts) {
    if (!opts.stationary)
        throw Unsupported("time-dependent transforms are not implemented");
    require_same_basis(h.M, h.E);
    require_same_basis(h.M, h.O);
    const Matrix &m = h.M.matrix, &e = h.E.matrix, &o = h.O.matrix;
    const Matrix beta = h.beta();

    StepResult r;
    r.epsilon = operator_sqrt(hermitized(m * m + o * o), opts.sqrt_tol);
    const Matrix g = beta * r.epsilon + beta * m - o;
    r.T = operator_sqrt(g * g, opts.sqrt_tol);
    Eigen::PartialPivLU<Matrix> lu(r.T);
    require_invertible(lu, "sqrt((beta eps + beta M - O)^2)");
    auto right_div = [&lu](const Matrix& a) {  // a T^-1
        const Matrix xt = lu.transpose().solve(a.transpose());
        return Matrix(xt.transpose());
    };

    r.U = right_div(g) * beta;
    r.U_inv = beta * right_div(g);

    const Matrix s = r.epsilon + m;
    const Matrix beta_eps = beta * r.epsilon;
    auto comm = [](const Matrix& a, const Matrix& b) { return Matrix(a * b - b * a); };
    auto acomm = [](const Matrix& a, const Matrix& b) { return Matrix(a * b + b * a); };

    const Matrix c_full = comm(r.T, comm(r.T, beta_eps + e)) + beta * comm(o, comm(o, m)) -
                          comm(o, comm(o, e)) - comm(s, comm(s, e)) -
                          comm(s, comm(m, o)) - beta * acomm(o, comm(s, e)) +
                          beta * acomm(s, comm(o, e));

    Matrix correction = c_full;
    if (comm_rel(m, o) <= opts.commute_tol) {
        // [M, O] = 0 collapses T onto a function of eps + M and drops two
        // terms; keep the reduction, but verify it against the full form.
        const Matrix c_red = comm(r.T, comm(r.T, e)) - comm(o, comm(o, e)) -
                             comm(s, comm(s, e)) - beta * acomm(o, comm(s, e)) +
                             beta * acomm(s, comm(o, e));
        r.reduced_path_used = true;
        r.reduction_gap = rel_norm(c_red - c_full, c_full.norm() > 0.0 ? c_full : r.T);
        if (r.reduction_gap > opts.reduction_check_tol)
            throw Error("reduced and full transformed-Hamiltonian updates disagree: "
                        "relative gap " + std::to_string(r.reduction_gap));
        correction = c_red;
    }

    r.H_prime = beta_eps + e + 0.5 * right_div(lu.solve(correction));
    r.E_prime = 0.5 * (r.H_prime + beta * r.H_prime * beta) - beta_eps;
    r.O_prime = 0.5 * (r.H_prime - beta * r.H_prime * beta);
    r.unitarity_defect = unitarity_defect_for(h, r.U);
    return r;
}

FWResult final_fw(const StepResult& step, const HamiltonianTriple& h,
                  const TransformOptions& opts) {
    (void)opts;
    const Matrix beta = h.beta();
    Eigen::PartialPivLU<Matrix> lu(step.epsilon);
    require_invertible(lu, "eps");
    const Matrix o2 = step.O_prime * step.O_prime;
    // {O'^2, eps^-1} via two solves against the same factorization.
    const Matrix o2_right = lu.transpose().solve(o2.transpose());
    const Matrix fold = o2_right.transpose() + lu.solve(o2);

    FWResult r;
    r.U = step.U;
    r.U_inv = step.U_inv;
    r.epsilon = step.epsilon;
    r.H_prime = step.H_prime;
    r.E_prime = step.E_prime;
    r.O_prime = step.O_prime;
    r.H_fw = beta * step.epsilon + step.E_prime + 0.25 * beta * fold;
    const double hp_norm = step.H_prime.norm();
    r.residual_odd_norm = hp_norm > 0.0 ? step.O_prime.norm() / hp_norm : 0.0;
    r.unitarity_defect = step.unitarity_defect;
    return r;
}

FWResult general_fw(const HamiltonianTriple& h, const TransformOptions& opts) {
    return final_fw(general_fw_step(h, opts), h, opts);
}

ProbeResult hbar_scaling_probe(const std::function<ProbeInputs(double)>& build,
                               const std::vector<double>& hbar_values, double floor,
                               const TransformOptions& opts) {
    if (hbar_values.size() < 2)
        throw Error("hbar_scaling_probe: need at least two hbar values");
    ProbeResult res;
    res.hbar_values = hbar_values;
    bool have_oracle = true;
    for (double hb : hbar_values) {
        const ProbeInputs in = build(hb);
        if (in.probes.empty()) throw Error("hbar_scaling_probe: no probe vectors");
        const StepResult step = general_fw_step(in.triple, opts);
        const FWResult fw = final_fw(step, in.triple, opts);
        const BlockOperator h_fw{fw.H_fw, in.triple.M.spinor_rank, in.triple.M.basis_tag};
        const Matrix odd_fw = grade_split(h_fw).odd.matrix;

        double dev_step = 0.0, dev_final = 0.0, dev_oracle = 0.0;
        for (const CVector& psi : in.probes) {
            dev_step = std::max(dev_step, (step.O_prime * psi).norm());
            dev_final = std::max(dev_final, (odd_fw * psi).norm());
            if (in.oracle_h)
                dev_oracle = std::max(dev_oracle, ((fw.H_fw - *in.oracle_h) * psi).norm());
        }
        res.odd_step.deviations.push_back(dev_step);
        res.odd_final.deviations.push_back(dev_final);
        if (in.oracle_h)
            res.vs_oracle.deviations.push_back(dev_oracle);
        else
            have_oracle = false;
    }

    auto fit = [&](ProbeSeries& s) {
        double top = 0.0;
        for (double d : s.deviations) top = std::max(top, d);
        if (s.deviations.size() != hbar_values.size() || top <= floor) {
            s.below_floor = true;
            s.slope = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        s.slope = log_log_slope(hbar_values, s.deviations);
    };
    fit(res.odd_step);
    fit(res.odd_final);
    if (have_oracle)
        fit(res.vs_oracle);
    else {
        res.vs_oracle.below_floor = false;
        res.vs_oracle.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

}  // namespace fwt
