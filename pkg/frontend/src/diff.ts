/** Word-level diff (LCS) used to highlight how a variant differs from the
 * annotator's revision. */

export type DiffOp = { kind: 'equal' | 'insert' | 'delete'; text: string };

function words(text: string): string[] {
  return text.split(/\s+/).filter((w) => w.length > 0);
}

export function wordDiff(before: string, after: string): DiffOp[] {
  const a = words(before);
  const b = words(after);
  const rows = a.length + 1;
  const cols = b.length + 1;
  const table = new Array<number>(rows * cols).fill(0);
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      table[i * cols + j] =
        a[i] === b[j]
          ? table[(i + 1) * cols + j + 1]! + 1
          : Math.max(table[(i + 1) * cols + j]!, table[i * cols + j + 1]!);
    }
  }
  const ops: DiffOp[] = [];
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      ops.push({ kind: 'equal', text: a[i]! });
      i++;
      j++;
    } else if (table[(i + 1) * cols + j]! >= table[i * cols + j + 1]!) {
      ops.push({ kind: 'delete', text: a[i]! });
      i++;
    } else {
      ops.push({ kind: 'insert', text: b[j]! });
      j++;
    }
  }
  for (; i < a.length; i++) ops.push({ kind: 'delete', text: a[i]! });
  for (; j < b.length; j++) ops.push({ kind: 'insert', text: b[j]! });
  return ops;
}

/** Renders the "after" side with insertions marked, deletions struck out. */
export function renderDiff(doc: Document, before: string, after: string): HTMLElement {
  const container = doc.createElement('span');
  container.className = 'diff';
  for (const op of wordDiff(before, after)) {
    let node: HTMLElement;
    if (op.kind === 'equal') {
      node = doc.createElement('span');
    } else if (op.kind === 'insert') {
      node = doc.createElement('mark');
      node.className = 'diff-insert';
    } else {
      node = doc.createElement('del');
      node.className = 'diff-delete';
    }
    node.textContent = op.text;
    container.appendChild(node);
    container.appendChild(doc.createTextNode(' '));
  }
  return container;
}
