/**
 * Draft review and variant selection.
 *
 * The draft stage shows the generated text read-only beside an editable
 * copy; submitting an untouched editor simply records the draft as the
 * revision. The variant stage lists the candidates with word-level diff
 * highlighting against the revision; picking one completes the item.
 */

import { renderDiff } from '../diff.js';

export function buildDraftReview(
  doc: Document,
  draft: string,
  onSubmitRevision: (text: string) => void,
): HTMLElement {
  const panel = doc.createElement('div');
  panel.className = 'draft-review';

  const original = doc.createElement('blockquote');
  original.className = 'draft-original';
  original.textContent = draft;

  const editor = doc.createElement('textarea');
  editor.className = 'draft-editor';
  editor.value = draft;
  editor.rows = 6;

  const submit = doc.createElement('button');
  submit.type = 'button';
  submit.className = 'submit-revision';
  submit.textContent = 'Save revision';
  submit.addEventListener('click', () => onSubmitRevision(editor.value));

  panel.append(original, editor, submit);
  return panel;
}

export function buildVariantChooser(
  doc: Document,
  revision: string,
  variants: string[],
  onSelect: (index: number) => void,
): HTMLElement {
  const panel = doc.createElement('div');
  panel.className = 'variant-chooser';

  const reference = doc.createElement('blockquote');
  reference.className = 'revision-reference';
  reference.textContent = revision;
  panel.appendChild(reference);

  const list = doc.createElement('ol');
  variants.forEach((variant, index) => {
    const entry = doc.createElement('li');
    entry.className = 'variant';
    entry.dataset.index = String(index);
    entry.appendChild(renderDiff(doc, revision, variant));
    const pick = doc.createElement('button');
    pick.type = 'button';
    pick.className = 'pick-variant';
    pick.textContent = `Choose variant ${index + 1}`;
    pick.addEventListener('click', () => onSelect(index));
    entry.appendChild(pick);
    list.appendChild(entry);
  });
  panel.appendChild(list);
  return panel;
}
