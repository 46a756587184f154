#ifndef SPARSE_CLOSURE_SPARSE_CLOSURE_HPP
#define SPARSE_CLOSURE_SPARSE_CLOSURE_HPP

#include "sparse_closure/matrix.hpp"
#include "sparse_closure/support_pattern.hpp"
#include "sparse_closure/qe_sentence.hpp"
#include "sparse_closure/infimum_oracle.hpp"
#include "sparse_closure/linear_closure.hpp"
#include "sparse_closure/fourier_motzkin.hpp"
#include "sparse_closure/pathological_data.hpp"
#include "sparse_closure/relu_net.hpp"
#include "sparse_closure/lu_experiment.hpp"

#endif  // SPARSE_CLOSURE_SPARSE_CLOSURE_HPP
