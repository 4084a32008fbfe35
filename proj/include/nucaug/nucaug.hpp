#pragma once

#include "ame.hpp"
#include "augmentation.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "training.hpp"
