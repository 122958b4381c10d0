#pragma once

#include "sepc/tensor.hpp"
#include "sepc/structural_entropy.hpp"
#include "sepc/soft_partition.hpp"
#include "sepc/task.hpp"
#include "sepc/prob_coder.hpp"
#include "sepc/metrics.hpp"
#include "sepc/data.hpp"
#include "sepc/train.hpp"
#include "sepc/io.hpp"
#include "sepc/sweep.hpp"
#include "sepc/verify.hpp"
