"""Global explanations: concepts from the latent space.

Clusters the trained model's node embeddings, measures concept
completeness against the task accuracy, and explains each concept's
representative node to produce class-level explanations. Look for the
split of the house's middle class into an anchored and an unanchored
concept. A few minutes.

    python demos/05_global_concepts.py
"""


from shypx import hypergnn as hg
from shypx.concepts import (
    class_explanations,
    concept_completeness,
    concept_representative,
    extract_concepts,
)
from shypx.explain import ExplainConfig, explain_instance
from shypx.synth import assemble_dataset, benchmark_spec

G = assemble_dataset(benchmark_spec("h_rand_house", seed=0))
result = hg.train(hg.model_for_graph(G, seed=1), G, hg.TrainConfig(epochs=500))
model = result.model
print(f"model val accuracy: {result.val_acc:.3f}")

Z = hg.node_embeddings(model, G)
cm = extract_concepts(Z, k=10, seed=0, labels=G.labels)
completeness = concept_completeness(cm, G.labels, G.split)
print(f"k=10 concept completeness: {completeness:.3f} "
      f"(within a few points of the val accuracy)")

print("\nconcept  members  majority class")
for c in range(cm.k):
    members = cm.members(c)
    if members.size:
        print(f"{c:7d}  {members.size:7d}  {int(cm.majority_class[c]):14d}")

class2 = [c for c in range(cm.k)
          if cm.members(c).size and cm.majority_class[c] == 2]
print(f"\nclass 2 (middle-of-house) concepts: {class2} "
      "(two concepts = the model distinguishes anchored from unanchored "
      "middle nodes)")

config = ExplainConfig(lambda_pred=1.0, lambda_size=0.05, seed=0)
by_class = class_explanations(cm, Z, G.labels,
                              lambda v: explain_instance(model, G, v, config))
print("\nclass-level explanations (size of each concept representative's "
      "explanation):")
for y in sorted(by_class):
    sizes = [r.explanation.size for r in by_class[y]]
    print(f"  class {y}: {len(by_class[y])} concepts, explanation sizes {sizes}")

rep = concept_representative(cm, Z, class2[0]) if class2 else None
if rep is not None:
    print(f"\nrepresentative of the first class-2 concept: node {rep} "
          f"(label {G.labels[rep]})")
