#pragma once

#include "aasgan/autodiff.hpp"
#include "aasgan/checkpoint.hpp"
#include "aasgan/common.hpp"
#include "aasgan/data.hpp"
#include "aasgan/eval.hpp"
#include "aasgan/losses.hpp"
#include "aasgan/models.hpp"
#include "aasgan/nn.hpp"
#include "aasgan/synth.hpp"
#include "aasgan/tensor.hpp"
#include "aasgan/training.hpp"
