#pragma once

#include "morpion/core.hpp"
#include "morpion/encoding.hpp"
#include "morpion/mcts.hpp"
#include "morpion/network.hpp"
#include "morpion/random.hpp"
#include "morpion/ranked_reward.hpp"
#include "morpion/record.hpp"
#include "morpion/render.hpp"
#include "morpion/selfplay.hpp"
