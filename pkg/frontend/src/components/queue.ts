/** Queue view: items with state badges, task/state filters, lease status. */

import type { ItemView } from '../api.js';

export interface QueueFilters {
  task: string; // '' = all
  state: string; // '' = all
}

export function buildQueueView(
  doc: Document,
  items: ItemView[],
  filters: QueueFilters,
  onFilterChange: (filters: QueueFilters) => void,
  onOpen: (id: string) => void,
): HTMLElement {
  const panel = doc.createElement('div');
  panel.className = 'queue';

  const bar = doc.createElement('div');
  bar.className = 'queue-filters';
  const tasks = ['', ...new Set(items.map((i) => i.task))].sort();
  const states = ['', ...new Set(items.map((i) => i.state))].sort();
  bar.appendChild(
    filterSelect(doc, 'task-filter', 'Task', tasks, filters.task, (task) =>
      onFilterChange({ ...filters, task }),
    ),
  );
  bar.appendChild(
    filterSelect(doc, 'state-filter', 'State', states, filters.state, (state) =>
      onFilterChange({ ...filters, state }),
    ),
  );
  panel.appendChild(bar);

  const list = doc.createElement('ul');
  list.className = 'queue-items';
  const visible = items.filter(
    (item) =>
      (!filters.task || item.task === filters.task) &&
      (!filters.state || item.state === filters.state),
  );
  for (const item of visible) {
    const row = doc.createElement('li');
    row.className = 'queue-item';
    row.dataset.id = item.id;

    const badge = doc.createElement('span');
    badge.className = `state-badge state-${item.state}`;
    badge.textContent = item.state;

    const title = doc.createElement('button');
    title.type = 'button';
    title.className = 'open-item';
    title.textContent = `${item.id} [${item.task}]`;
    title.addEventListener('click', () => onOpen(item.id));

    const lease = doc.createElement('span');
    lease.className = 'lease-status';
    lease.textContent = item.leasable
      ? 'available'
      : `leased to ${item.lease?.annotator ?? 'someone'}`;

    row.append(badge, title, lease);
    list.appendChild(row);
  }
  panel.appendChild(list);
  return panel;
}

function filterSelect(
  doc: Document,
  name: string,
  label: string,
  options: string[],
  current: string,
  onChange: (value: string) => void,
): HTMLElement {
  const wrapper = doc.createElement('label');
  wrapper.textContent = label;
  const select = doc.createElement('select');
  select.name = name;
  for (const option of options) {
    const element = doc.createElement('option');
    element.value = option;
    element.textContent = option === '' ? 'all' : option;
    if (option === current) element.selected = true;
    select.appendChild(element);
  }
  select.addEventListener('change', () => onChange(select.value));
  wrapper.appendChild(select);
  return wrapper;
}
