"""Forward, backward and self references produce a cyclic graph."""

from modelcc import Parser
from modelcc.gallery import graph_adjacency, model_path

parser = Parser.from_file(model_path("graph"))
graph = parser.parse("node a -> b -> c; node b -> a; node c -> c;")
for name, targets in graph_adjacency(graph).items():
    print(name, "->", ", ".join(targets))
print(graph.to_json(indent=None))
