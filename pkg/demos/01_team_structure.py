# coding: utf-8

# # Building a robot team
#
# A team is a tree. Leaves stand for individual robots, inner nodes for teams,
# and the first child of every team is its leader: the member whose
# organizing and communicating scores add up highest.

from teamcoop import CapabilityProfile, create_robot, decompose_goal, form_team, join, leave, members, validate
from teamcoop import Registry, TeamStructure

registry = Registry()
scout = create_robot("scout", CapabilityProfile(moving=0.9, sensing=0.8, organizing=0.3, communicating=0.6), registry=registry)
hauler = create_robot("hauler", CapabilityProfile(moving=0.6, acting=0.9, organizing=0.2, communicating=0.3), registry=registry)
chief = create_robot("chief", CapabilityProfile(organizing=0.9, communicating=0.8, learning=0.5), registry=registry)

team = form_team([scout, hauler, chief], {"map-area", "move-crates", "report"})
print("leader:", team.leader_robot_id)
print("members in slot order:", members(team))

# Team capability is the best member in each dimension.

print(team.capability)

# Goals start with the leader. Hand them out, one set per child slot.

team = decompose_goal(team, {0: {"report"}, 1: {"map-area"}, 2: {"move-crates"}})
for child in team.children:
    print(f"  {child.robot_id:7s} -> {sorted(child.goals)}")

# Every operation returns a new tree; `validate` should stay quiet throughout.

newcomer = create_robot("welder", CapabilityProfile(acting=0.7, organizing=0.1), registry=registry)
bigger = join(team, newcomer)
smaller = leave(bigger, "chief")
print("after the leader leaves:", smaller.leader_robot_id, members(smaller))
print("goals kept:", sorted(smaller.goals))

structure = TeamStructure(tuple(r for r in registry if r.id != "chief"), frozenset(), smaller)
print("violations:", validate(structure))
