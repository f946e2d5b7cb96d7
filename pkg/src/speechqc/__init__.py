"""speechqc: a model-agnostic speech quality evaluation stack.

Modules:
  core     - samples, annotations, tasks, the eight-dimension schema
  dataset  - manifests, deterministic splits, leakage audits
  prompts  - task/judge prompt construction from versioned assets
  cot      - think/answer structured output parsing and serialization
  metrics  - text overlap, correlation/accuracy, and detection metrics
  reward   - rubric reward arithmetic and group advantages
  judge    - chat-completion judge client plus a deterministic mock
  harness  - end-to-end evaluation pipeline and report rendering
  annosvc  - human-in-the-loop annotation workflow service
"""

__version__ = "0.1.0"
