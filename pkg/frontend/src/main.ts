/** Browser entry point: ?service=<base-url>&annotator=<name> */

import { AnnotationApi } from './api.js';
import { WorkbenchApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const service = params.get('service') ?? 'http://127.0.0.1:8400';
const annotator = params.get('annotator') ?? 'anonymous';

const root = document.getElementById('app');
if (!root) {
  throw new Error('missing #app container');
}
const app = new WorkbenchApp(root, new AnnotationApi(service), { annotator });
void app.start();
