/**
 * The structured questionnaire: eight dimension selectors (five-point
 * radios, or A/B/Similar toggles for comparisons), the three categorical
 * dropdowns, and the five open-text fields.
 *
 * Every input is a constrained widget, so the form cannot produce a value
 * outside the schema's enums and ranges. Submit stays disabled (with the
 * missing rows highlighted) until all eight dimensions are set, and the
 * payload is validated once more before the POST fires.
 */

import {
  DIMENSIONS,
  DISTORTION_TYPES,
  EMOTION_TYPES,
  GENDERS,
  OPEN_FIELDS,
  Preference,
  PREFERENCE_LABELS,
  QuestionnaireFields,
  RATE_LABELS,
  SCORE_VALUES,
  TaskKind,
  missingDimensions,
  validateQuestionnaire,
} from '../schema.js';

export interface QuestionnaireForm {
  element: HTMLElement;
  /** null while invalid; mirrors the disabled submit button. */
  currentFields(): QuestionnaireFields | null;
}

export function buildQuestionnaireForm(
  doc: Document,
  task: TaskKind,
  audioUrls: string[],
  onSubmit: (fields: QuestionnaireFields) => void,
): QuestionnaireForm {
  const root = doc.createElement('form');
  root.className = 'questionnaire';
  root.appendChild(buildAudioPanel(doc, task, audioUrls));

  const chosen = new Map<string, number | Preference>();
  const rows = new Map<string, HTMLFieldSetElement>();

  const dimensionsBox = doc.createElement('div');
  dimensionsBox.className = 'dimensions';
  for (const dimension of DIMENSIONS) {
    const row = doc.createElement('fieldset');
    row.className = 'dimension-row missing';
    row.dataset.dimension = dimension.id;
    const legend = doc.createElement('legend');
    legend.textContent = dimension.label;
    row.appendChild(legend);

    if (task === TaskKind.Comparison) {
      for (const preference of Object.values(Preference)) {
        row.appendChild(
          radio(doc, `dim-${dimension.id}`, preference, PREFERENCE_LABELS[preference], () => {
            chosen.set(dimension.id, preference);
            refresh();
          }),
        );
      }
    } else {
      for (const value of SCORE_VALUES) {
        const label =
          dimension.id === 'speech_rate' ? `${value} (${RATE_LABELS[value]})` : String(value);
        row.appendChild(
          radio(doc, `dim-${dimension.id}`, String(value), label, () => {
            chosen.set(dimension.id, value);
            refresh();
          }),
        );
      }
      // Keyboard throughput: digits 1..5 set the row under focus.
      row.addEventListener('keydown', (event) => {
        const key = (event as KeyboardEvent).key;
        if (key >= '1' && key <= '5') {
          const input = row.querySelector<HTMLInputElement>(`input[value="${key}"]`);
          if (input) {
            input.checked = true;
            chosen.set(dimension.id, Number(key));
            refresh();
            event.preventDefault();
          }
        }
      });
    }
    rows.set(dimension.id, row);
    dimensionsBox.appendChild(row);
  }
  root.appendChild(dimensionsBox);

  const metadataBox = doc.createElement('div');
  metadataBox.className = 'metadata';
  const distortion = dropdown(doc, 'distortion_type', 'Distortion type', DISTORTION_TYPES);
  const emotion = dropdown(doc, 'emotion_type', 'Emotion type', EMOTION_TYPES);
  const gender = dropdown(doc, 'gender', 'Speaker gender', GENDERS);
  metadataBox.append(distortion.wrapper, emotion.wrapper, gender.wrapper);
  root.appendChild(metadataBox);

  const openBox = doc.createElement('div');
  openBox.className = 'open-fields';
  const openInputs = new Map<string, HTMLInputElement>();
  for (const field of OPEN_FIELDS) {
    const wrapper = doc.createElement('label');
    wrapper.textContent = field.label;
    const input = doc.createElement('input');
    input.type = 'text';
    input.name = field.id;
    wrapper.appendChild(input);
    openInputs.set(field.id, input);
    openBox.appendChild(wrapper);
  }
  root.appendChild(openBox);

  const submit = doc.createElement('button');
  submit.type = 'submit';
  submit.textContent = 'Submit questionnaire';
  submit.disabled = true;
  root.appendChild(submit);

  function collect(): QuestionnaireFields {
    const scores = DIMENSIONS.filter((d) => chosen.has(d.id)).map((d) => {
      const value = chosen.get(d.id)!;
      return task === TaskKind.Comparison
        ? { dimension: d.id, preference: value as Preference }
        : { dimension: d.id, value: value as number, qualifier: null };
    });
    const open: Record<string, string> = {};
    for (const [key, input] of openInputs) open[key] = input.value;
    return {
      scores,
      metadata: {
        distortion_type: distortion.select.value,
        emotion_type: emotion.select.value,
        gender: gender.select.value,
      },
      open_fields: open,
    };
  }

  function refresh(): void {
    const missing = missingDimensions(chosen);
    for (const [id, row] of rows) {
      row.classList.toggle('missing', missing.includes(id));
    }
    submit.disabled =
      missing.length > 0 || validateQuestionnaire(collect(), task).length > 0;
  }

  root.addEventListener('submit', (event) => {
    event.preventDefault();
    const fields = collect();
    if (validateQuestionnaire(fields, task).length === 0) {
      onSubmit(fields);
    }
  });

  refresh();
  return {
    element: root,
    currentFields: () => {
      const fields = collect();
      return validateQuestionnaire(fields, task).length === 0 ? fields : null;
    },
  };
}

function buildAudioPanel(doc: Document, task: TaskKind, urls: string[]): HTMLElement {
  const panel = doc.createElement('div');
  panel.className = 'audio-panel';
  const labels = task === TaskKind.Comparison ? ['A', 'B'] : [''];
  const players: HTMLAudioElement[] = [];
  urls.forEach((url, index) => {
    const wrapper = doc.createElement('div');
    wrapper.className = 'audio-slot';
    if (labels[index]) {
      const tag = doc.createElement('span');
      tag.className = 'audio-label';
      tag.textContent = `Sample ${labels[index]}`;
      wrapper.appendChild(tag);
    }
    const audio = doc.createElement('audio');
    audio.controls = true;
    audio.src = url;
    audio.dataset.slot = labels[index] || 'single';
    players.push(audio);
    wrapper.appendChild(audio);
    panel.appendChild(wrapper);
  });
  // Synchronized pair: starting one player pauses the other.
  if (players.length === 2) {
    for (const player of players) {
      player.addEventListener('play', () => {
        for (const other of players) {
          if (other !== player) other.pause();
        }
      });
    }
  }
  return panel;
}

function radio(
  doc: Document,
  name: string,
  value: string,
  label: string,
  onChange: () => void,
): HTMLElement {
  const wrapper = doc.createElement('label');
  wrapper.className = 'choice';
  const input = doc.createElement('input');
  input.type = 'radio';
  input.name = name;
  input.value = value;
  input.addEventListener('change', onChange);
  wrapper.appendChild(input);
  wrapper.appendChild(doc.createTextNode(label));
  return wrapper;
}

function dropdown(
  doc: Document,
  name: string,
  label: string,
  options: readonly string[],
): { wrapper: HTMLElement; select: HTMLSelectElement } {
  const wrapper = doc.createElement('label');
  wrapper.textContent = label;
  const select = doc.createElement('select');
  select.name = name;
  for (const option of options) {
    const element = doc.createElement('option');
    element.value = option;
    element.textContent = option;
    select.appendChild(element);
  }
  wrapper.appendChild(select);
  return { wrapper, select };
}
