from .base import Domain
from .blocksworld import (
    TABLE,
    BlocksAction,
    BlocksConfig,
    BlocksDomain,
    BlocksParseError,
    PreconditionError,
    apply_blocks_action,
    blocks_goal_satisfied,
    enumerate_legal_actions,
    parse_blocks_action,
    random_blocks_instance,
)
from .game24 import Game24Domain, Game24State, game24_goal_test, game24_legal_steps, random_game24_instance, solvable
from .instances import bundled_instance, domain_from_dict, domain_to_dict, load_instance
